//! Report structures serialized to JSON, plus the CSV field dump.

use serde::Serialize;

use rhoj_core::estimators::{EstimatorSet, UncertaintyIndicators};
use rhoj_core::state::ProbabilityFields;

/// Complex value serialized as its two components.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimatorsJson {
    pub mean_x: f64,
    pub mean_p: f64,
    pub std_x: f64,
    pub std_p: f64,
    pub corr_xp: ComplexJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_h: Option<f64>,
}

impl From<&EstimatorSet> for EstimatorsJson {
    fn from(set: &EstimatorSet) -> Self {
        Self {
            mean_x: set.mean_x,
            mean_p: set.mean_p,
            std_x: set.std_x,
            std_p: set.std_p,
            corr_xp: ComplexJson { re: set.corr_xp.re, im: set.corr_xp.im },
            mean_h: set.mean_h,
            std_h: set.std_h,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IndicatorsJson {
    pub eps_mean_x: f64,
    pub eps_mean_p: f64,
    pub eps_corr_xp: f64,
    pub eps_std_x: f64,
    pub eps_std_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_mean_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_std_h: Option<f64>,
    pub w: f64,
}

impl From<&UncertaintyIndicators> for IndicatorsJson {
    fn from(ind: &UncertaintyIndicators) -> Self {
        Self {
            eps_mean_x: ind.eps_mean_x,
            eps_mean_p: ind.eps_mean_p,
            eps_corr_xp: ind.eps_corr_xp,
            eps_std_x: ind.eps_std_x,
            eps_std_p: ind.eps_std_p,
            eps_mean_h: ind.eps_mean_h,
            eps_std_h: ind.eps_std_h,
            w: ind.w,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioJson {
    pub state: String,
    pub hbar: f64,
    pub mass: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub grid_n: usize,
    pub span_factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RsurJson {
    pub margin_in: f64,
    pub margin_out: f64,
}

/// Report of the `run` command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioJson,
    pub ideal_measurement: bool,
    pub in_estimators: EstimatorsJson,
    pub out_estimators: EstimatorsJson,
    pub indicators: IndicatorsJson,
    pub rsur: RsurJson,
    pub checks: Vec<CheckJson>,
}

/// One compared quantity in a `verify` report.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonJson {
    pub quantity: String,
    pub numerical: f64,
    pub oracle: f64,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Comparison of the two closed forms of the out-reading momentum spread.
#[derive(Debug, Clone, Serialize)]
pub struct SpreadFormJson {
    pub gamma: f64,
    pub lambda: f64,
    pub derived_form: f64,
    pub alternate_form: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenario: ScenarioJson,
    pub comparisons: Vec<ComparisonJson>,
    pub spread_forms: Vec<SpreadFormJson>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchComparisonJson {
    pub observable: String,
    pub n_trials: usize,
    pub seed: u64,
    pub fac_mean: f64,
    pub fac_std: f64,
    pub eps_mean: f64,
    pub eps_std: f64,
    pub prd_mean: f64,
    pub prd_std: f64,
    pub z_mean: f64,
    pub std_rel_error: f64,
    pub degenerate: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistogramJson {
    pub n_bins: usize,
    pub mean: f64,
    pub std: f64,
    pub frequency_sum_defect: f64,
    pub mean_identity_defect: f64,
    pub std_identity_defect: f64,
    pub bin_values: Vec<f64>,
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub scenario: ScenarioJson,
    pub position: BatchComparisonJson,
    pub momentum: BatchComparisonJson,
    pub position_histogram: HistogramJson,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub scenario: ScenarioJson,
    pub observed_std_x: f64,
    pub fitted_gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_std_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_lambda: Option<f64>,
}

/// One row of a sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub lambda: f64,
    pub eps_mean_x: f64,
    pub eps_mean_p: f64,
    pub eps_corr_xp: f64,
    pub eps_std_x: f64,
    pub eps_std_p: f64,
    pub w: f64,
    pub rsur_margin_in: f64,
    pub rsur_margin_out: f64,
    pub pass: bool,
}

/// Decimal float with 17 significant digits, round-trip exact for f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV dump of the in/out fields, one row per grid point.
pub fn fields_csv(fields_in: &ProbabilityFields, fields_out: &ProbabilityFields) -> String {
    let grid = fields_in.grid();
    let mut out = String::with_capacity(grid.n() * 96);
    out.push_str("x,rho_in,j_in,rho_out,j_out\n");
    for i in 0..grid.n() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_float(grid.x(i)),
            fmt_float(fields_in.rho()[i]),
            fmt_float(fields_in.j()[i]),
            fmt_float(fields_out.rho()[i]),
            fmt_float(fields_out.j()[i]),
        ));
    }
    out
}

/// CSV rendering of a sweep table.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "gamma,lambda,eps_mean_x,eps_mean_p,eps_corr_xp,eps_std_x,eps_std_p,w,\
         rsur_margin_in,rsur_margin_out,pass\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_float(row.gamma),
            fmt_float(row.lambda),
            fmt_float(row.eps_mean_x),
            fmt_float(row.eps_mean_p),
            fmt_float(row.eps_corr_xp),
            fmt_float(row.eps_std_x),
            fmt_float(row.eps_std_p),
            fmt_float(row.w),
            fmt_float(row.rsur_margin_in),
            fmt_float(row.rsur_margin_out),
            row.pass,
        ));
    }
    out
}
