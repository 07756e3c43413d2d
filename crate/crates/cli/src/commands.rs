//! Implementations of the CLI commands: run, verify, sample, sweep,
//! calibrate.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use rhoj_core::calibration::{fit_gamma, fit_lambda};
use rhoj_core::error::Error as CoreError;
use rhoj_core::estimators::{
    estimate, rsur_margin, uncertainty_indicators, EstimatorSet, UncertaintyIndicators,
};
use rhoj_core::grid::Grid1D;
use rhoj_core::kernel::{discretize, verify_normalization, KernelSpec};
use rhoj_core::oracle::{
    analytic_in_estimators, analytic_out_estimators, std_p_out, ScenarioParams, StdPForm,
};
use rhoj_core::sampling::{
    compare_fac_vs_prd, draw_momentum_samples, draw_position_samples, factual_estimators,
    spectrum_estimators, SampleBatch,
};
use rhoj_core::state::{
    auto_grid_custom, fields_from_wavefunction, synthesize, total_probability, ProbabilityFields,
    StateSpec,
};
use rhoj_core::transform::measure;

use crate::config::Config;
use crate::report::{
    fields_csv, sweep_csv, BatchComparisonJson, CalibrationReport, CheckJson, ComparisonJson,
    EstimatorsJson, HistogramJson, IndicatorsJson, RsurJson, RunReport, SampleReport,
    ScenarioJson, SpreadFormJson, SweepRow, VerifyReport,
};
use crate::CliError;

/// Row-normalization defect allowed on a freshly discretized kernel.
const ROW_DEFECT_TOL: f64 = 1e-12;
/// Allowed drift of the density and current quadratures through a
/// measurement.
const CONSERVATION_TOL: f64 = 1e-10;
/// Allowed shortfall of the deviation product below hbar/2, relative.
const RSUR_SLACK: f64 = 1e-9;

/// Everything one scenario evaluation produces.
pub struct ScenarioEval {
    pub grid: Grid1D,
    pub fields_in: ProbabilityFields,
    pub fields_out: ProbabilityFields,
    pub set_in: EstimatorSet,
    pub set_out: EstimatorSet,
    pub indicators: UncertaintyIndicators,
    pub checks: Vec<CheckJson>,
}

impl ScenarioEval {
    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Sort core errors into configuration-class failures (bad scenario
/// parameters) and numerical ones.
fn classify(err: CoreError) -> CliError {
    match err {
        CoreError::InvalidBounds { .. }
        | CoreError::InvalidGridPoints(_)
        | CoreError::InvalidStateSpec(_)
        | CoreError::InvalidConstants { .. }
        | CoreError::GridTooSmall { .. }
        | CoreError::InvalidKernelSpec(_)
        | CoreError::UnderResolvedKernel { .. } => CliError::Config(err.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}


fn scenario_json(cfg: &Config) -> ScenarioJson {
    let state = match cfg.state {
        StateSpec::GaussianPacket { x0, sigma, k } => {
            format!("gaussian_packet(x0 = {x0}, sigma = {sigma}, k = {k})")
        }
        StateSpec::OscillatorGround { omega } => format!("oscillator_ground(omega = {omega})"),
    };
    ScenarioJson {
        state,
        hbar: cfg.constants.hbar,
        mass: cfg.constants.mass,
        gamma: cfg.gamma.width(),
        lambda: cfg.lambda.width(),
        grid_n: cfg.grid_n,
        span_factor: cfg.span_factor,
    }
}

/// Build the grid for a scenario, covering the widest kernel that will be
/// applied on it.
fn scenario_grid(cfg: &Config, extra_widths: &[f64]) -> Result<Grid1D, CliError> {
    let mut widths = vec![cfg.gamma.width(), cfg.lambda.width()];
    widths.extend_from_slice(extra_widths);
    auto_grid_custom(&cfg.state, &widths, &cfg.constants, cfg.grid_n, cfg.span_factor)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn evaluate_on_grid(
    cfg: &Config,
    grid: &Grid1D,
    gamma: &KernelSpec,
    lambda: &KernelSpec,
    fields_in: &ProbabilityFields,
) -> Result<ScenarioEval, CliError> {
    let omega = cfg.state.omega();
    let fields_out = measure(fields_in, gamma, lambda, grid).map_err(classify)?;
    let set_in = estimate(fields_in, &cfg.constants, omega).map_err(classify)?;
    let set_out = estimate(&fields_out, &cfg.constants, omega).map_err(classify)?;
    let indicators =
        uncertainty_indicators(&set_in, &set_out, &cfg.constants).map_err(classify)?;

    let mut checks = Vec::new();
    for (name, spec) in [("gamma_kernel_rows", gamma), ("lambda_kernel_rows", lambda)] {
        let kernel = discretize(spec, grid).map_err(classify)?;
        let defect = verify_normalization(&kernel).max_row_defect;
        checks.push(CheckJson {
            name: name.into(),
            pass: defect <= ROW_DEFECT_TOL,
            detail: format!("max row defect {defect:.3e} (tolerance {ROW_DEFECT_TOL:.0e})"),
        });
    }
    let mass_drift = (total_probability(&fields_out) - total_probability(fields_in)).abs();
    checks.push(CheckJson {
        name: "probability_conservation".into(),
        pass: mass_drift <= CONSERVATION_TOL,
        detail: format!("mass drift {mass_drift:.3e} (tolerance {CONSERVATION_TOL:.0e})"),
    });
    let flux_drift = (grid.integrate(fields_out.j()) - grid.integrate(fields_in.j())).abs();
    checks.push(CheckJson {
        name: "current_conservation".into(),
        pass: flux_drift <= CONSERVATION_TOL,
        detail: format!("current drift {flux_drift:.3e} (tolerance {CONSERVATION_TOL:.0e})"),
    });
    let bound = -RSUR_SLACK * 0.5 * cfg.constants.hbar;
    for (name, set) in [("rsur_in", &set_in), ("rsur_out", &set_out)] {
        let margin = rsur_margin(set, &cfg.constants);
        checks.push(CheckJson {
            name: name.into(),
            pass: margin >= bound,
            detail: format!("deviation-product margin {margin:.3e} (>= {bound:.1e})"),
        });
    }

    Ok(ScenarioEval {
        grid: *grid,
        fields_in: fields_in.clone(),
        fields_out,
        set_in,
        set_out,
        indicators,
        checks,
    })
}

/// Evaluate the configured scenario end to end.
pub fn evaluate_scenario(cfg: &Config) -> Result<ScenarioEval, CliError> {
    let grid = scenario_grid(cfg, &[])?;
    let psi = synthesize(&cfg.state, &grid, &cfg.constants)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let fields_in = fields_from_wavefunction(&psi, &cfg.constants);
    evaluate_on_grid(cfg, &grid, &cfg.gamma, &cfg.lambda, &fields_in)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::Io)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Numerical(format!("report serialization failed: {e}")))
}

/// `run`: compute in/out fields, estimators, and indicators; write the
/// field dump and the report.
pub fn run(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let eval = evaluate_scenario(cfg)?;
    let ideal = cfg.gamma == KernelSpec::Ideal && cfg.lambda == KernelSpec::Ideal;
    let report = RunReport {
        scenario: scenario_json(cfg),
        ideal_measurement: ideal,
        in_estimators: EstimatorsJson::from(&eval.set_in),
        out_estimators: EstimatorsJson::from(&eval.set_out),
        indicators: IndicatorsJson::from(&eval.indicators),
        rsur: RsurJson {
            margin_in: rsur_margin(&eval.set_in, &cfg.constants),
            margin_out: rsur_margin(&eval.set_out, &cfg.constants),
        },
        checks: eval.checks.clone(),
    };

    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    write(&out_dir.join("fields.csv"), &fields_csv(&eval.fields_in, &eval.fields_out))?;
    write(&out_dir.join("report.json"), &to_json(&report)?)?;

    println!(
        "run: gamma = {}, lambda = {}{}",
        cfg.gamma.width(),
        cfg.lambda.width(),
        if ideal { " (ideal measurement)" } else { "" }
    );
    println!(
        "  eps(<x>) = {:.6e}  eps(<p>) = {:.6e}  eps(dx) = {:.6e}  eps(dp) = {:.6e}  W = {:.6e}",
        eval.indicators.eps_mean_x,
        eval.indicators.eps_mean_p,
        eval.indicators.eps_std_x,
        eval.indicators.eps_std_p,
        eval.indicators.w
    );
    for check in &eval.checks {
        println!("  check {}: {} ({})", check.name, if check.pass { "ok" } else { "FAILED" }, check.detail);
    }
    println!("  wrote {}", out_dir.join("fields.csv").display());
    println!("  wrote {}", out_dir.join("report.json").display());

    if !eval.checks_pass() {
        return Err(CliError::Numerical("one or more numerical checks failed".into()));
    }
    Ok(())
}

fn oracle_params(cfg: &Config, gamma: f64, lambda: f64) -> Result<ScenarioParams, CliError> {
    let packet = cfg
        .state
        .packet(&cfg.constants)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(ScenarioParams {
        x0: packet.x0,
        sigma: packet.sigma,
        k: packet.k,
        gamma,
        lambda,
        hbar: cfg.constants.hbar,
        mass: cfg.constants.mass,
        omega: cfg.state.omega(),
    })
}

fn compare(
    comparisons: &mut Vec<ComparisonJson>,
    quantity: String,
    numerical: f64,
    oracle: f64,
    tolerance: f64,
    relative: bool,
) {
    let defect = if relative {
        (numerical - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE)
    } else {
        (numerical - oracle).abs()
    };
    comparisons.push(ComparisonJson {
        quantity,
        numerical,
        oracle,
        defect,
        tolerance,
        pass: defect <= tolerance,
    });
}

/// `verify`: compare the numerical pipeline against the closed-form
/// oracle over the configured width sweep.
pub fn verify(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let max_width = cfg
        .sweep_gammas
        .iter()
        .chain(&cfg.sweep_lambdas)
        .fold(0.0f64, |m, w| m.max(*w));
    let grid = scenario_grid(cfg, &[max_width])?;
    let psi = synthesize(&cfg.state, &grid, &cfg.constants)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let fields_in = fields_from_wavefunction(&psi, &cfg.constants);

    let pairs: Vec<(f64, f64)> = cfg
        .sweep_gammas
        .iter()
        .flat_map(|&g| cfg.sweep_lambdas.iter().map(move |&l| (g, l)))
        .collect();

    let evals: Vec<(f64, f64, ScenarioEval)> = pairs
        .par_iter()
        .map(|&(g, l)| {
            let gamma = KernelSpec::from_width(g).map_err(classify)?;
            let lambda = KernelSpec::from_width(l).map_err(classify)?;
            evaluate_on_grid(cfg, &grid, &gamma, &lambda, &fields_in)
                .map(|eval| (g, l, eval))
        })
        .collect::<Result<_, CliError>>()?;

    let mut comparisons = Vec::new();
    let mut spread_forms = Vec::new();
    for (g, l, eval) in &evals {
        let params = oracle_params(cfg, *g, *l)?;
        let oracle_in = analytic_in_estimators(&params).map_err(classify)?;
        let oracle_out =
            analytic_out_estimators(&params, StdPForm::Derived).map_err(classify)?;
        let tag = format!("gamma={g},lambda={l}");
        let abs_tol = 1e-8 * oracle_in.mean_p.abs().max(1.0);
        compare(&mut comparisons, format!("[{tag}] mean_x_in"), eval.set_in.mean_x, oracle_in.mean_x, abs_tol, false);
        compare(&mut comparisons, format!("[{tag}] mean_x_out"), eval.set_out.mean_x, oracle_out.mean_x, abs_tol, false);
        compare(&mut comparisons, format!("[{tag}] mean_p_in"), eval.set_in.mean_p, oracle_in.mean_p, abs_tol, false);
        compare(&mut comparisons, format!("[{tag}] mean_p_out"), eval.set_out.mean_p, oracle_out.mean_p, abs_tol, false);
        compare(&mut comparisons, format!("[{tag}] std_x_in"), eval.set_in.std_x, oracle_in.std_x, 1e-6, true);
        compare(&mut comparisons, format!("[{tag}] std_x_out"), eval.set_out.std_x, oracle_out.std_x, 1e-6, true);
        compare(&mut comparisons, format!("[{tag}] std_p_in"), eval.set_in.std_p, oracle_in.std_p, 1e-6, true);
        compare(&mut comparisons, format!("[{tag}] std_p_out"), eval.set_out.std_p, oracle_out.std_p, 1e-6, true);
        compare(&mut comparisons, format!("[{tag}] corr_re_out"), eval.set_out.corr_xp.re, 0.0, 1e-8, false);
        compare(&mut comparisons, format!("[{tag}] corr_im_out"), eval.set_out.corr_xp.im, 0.5 * cfg.constants.hbar, 1e-6, false);
        if let (Some(mh), Some(oh)) = (eval.set_out.mean_h, oracle_out.mean_h) {
            compare(&mut comparisons, format!("[{tag}] mean_h_out"), mh, oh, 1e-6, true);
        }
        if let (Some(sh), Some(oh)) = (eval.set_out.std_h, oracle_out.std_h) {
            if oh == 0.0 {
                compare(&mut comparisons, format!("[{tag}] std_h_out"), sh, oh, 1e-8, false);
            } else {
                compare(&mut comparisons, format!("[{tag}] std_h_out"), sh, oh, 1e-6, true);
            }
        }

        let derived = std_p_out(&params, StdPForm::Derived).map_err(classify)?;
        let alternate = std_p_out(&params, StdPForm::Alternate).map_err(classify)?;
        spread_forms.push(SpreadFormJson {
            gamma: *g,
            lambda: *l,
            derived_form: derived,
            alternate_form: alternate,
            discrepancy: (alternate - derived).abs(),
        });
        if g == l {
            compare(&mut comparisons, format!("[{tag}] std_p_out_alternate_form"), eval.set_out.std_p, alternate, 1e-6, true);
        }
    }

    let checks_pass = evals.iter().all(|(_, _, e)| e.checks_pass());
    let pass = checks_pass && comparisons.iter().all(|c| c.pass);
    let report = VerifyReport {
        scenario: scenario_json(cfg),
        comparisons,
        spread_forms,
        pass,
    };

    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    write(&out_dir.join("verify.json"), &to_json(&report)?)?;

    let failed: Vec<&ComparisonJson> = report.comparisons.iter().filter(|c| !c.pass).collect();
    println!(
        "verify: {} comparisons over {} scenarios, {} failed",
        report.comparisons.len(),
        evals.len(),
        failed.len()
    );
    for c in &failed {
        println!("  FAILED {}: numerical {} vs oracle {} (defect {:.3e}, tolerance {:.0e})",
            c.quantity, c.numerical, c.oracle, c.defect, c.tolerance);
    }
    for form in &report.spread_forms {
        if form.gamma != form.lambda {
            println!(
                "  note: alternate-form momentum spread differs by {:.6e} at gamma={}, lambda={}",
                form.discrepancy, form.gamma, form.lambda
            );
        }
    }
    println!("  wrote {}", out_dir.join("verify.json").display());

    if !pass {
        return Err(CliError::Numerical("verification against the oracle failed".into()));
    }
    Ok(())
}

fn batch_comparison(
    observable: &str,
    batch: &SampleBatch,
    prd_mean: f64,
    prd_std: f64,
) -> BatchComparisonJson {
    let fac = factual_estimators(batch);
    let cmp = compare_fac_vs_prd(&fac, prd_mean, prd_std);
    BatchComparisonJson {
        observable: observable.into(),
        n_trials: batch.n_trials(),
        seed: batch.seed(),
        fac_mean: fac.mean,
        fac_std: fac.std,
        eps_mean: fac.eps_mean,
        eps_std: fac.eps_std,
        prd_mean,
        prd_std,
        z_mean: cmp.z_mean,
        std_rel_error: cmp.std_rel_error,
        degenerate: cmp.degenerate,
        pass: cmp.pass,
    }
}

/// `sample`: draw trial batches from the out-state, compute factual
/// estimators and the spectrum histogram, and compare with predictions.
pub fn sample(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let Some(sampling) = cfg.sampling else {
        return Err(CliError::Config(
            "the sample command needs a sampling block (sampling.n_trials, sampling.seed)".into(),
        ));
    };
    let eval = evaluate_scenario(cfg)?;

    let position = draw_position_samples(&eval.fields_out, sampling.n_trials, sampling.seed)
        .map_err(classify)?;
    let position_cmp =
        batch_comparison("x", &position, eval.set_out.mean_x, eval.set_out.std_x);

    let momentum = draw_momentum_samples(
        &eval.fields_out,
        sampling.n_trials,
        sampling.seed.wrapping_add(1),
        &cfg.constants,
    )
    .map_err(classify)?;
    let momentum_cmp =
        batch_comparison("p", &momentum, eval.set_out.mean_p, eval.set_out.std_p);

    let hist = spectrum_estimators(&position, sampling.n_bins).map_err(classify)?;
    let quantized = SampleBatch::from_values(
        position.values().iter().map(|v| hist.midpoint_of(*v)).collect(),
        0,
    )
    .map_err(classify)?;
    let fac_q = factual_estimators(&quantized);
    let histogram = HistogramJson {
        n_bins: sampling.n_bins,
        mean: hist.mean(),
        std: hist.std(),
        frequency_sum_defect: (hist.frequencies().iter().sum::<f64>() - 1.0).abs(),
        mean_identity_defect: (hist.mean() - fac_q.mean).abs(),
        std_identity_defect: (hist.std() - fac_q.std).abs(),
        bin_values: hist.bin_values().to_vec(),
        frequencies: hist.frequencies().to_vec(),
    };

    let pass = position_cmp.pass
        && momentum_cmp.pass
        && histogram.frequency_sum_defect <= 1e-12
        && histogram.mean_identity_defect <= 1e-12
        && histogram.std_identity_defect <= 1e-12;
    let report = SampleReport {
        scenario: scenario_json(cfg),
        position: position_cmp,
        momentum: momentum_cmp,
        position_histogram: histogram,
        pass,
    };

    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    write(&out_dir.join("sample.json"), &to_json(&report)?)?;

    for cmp in [&report.position, &report.momentum] {
        println!(
            "sample {}: fac mean {:.6} (prd {:.6}, z = {:.2}), fac std {:.6} (prd {:.6}, defect {:.4}) -> {}",
            cmp.observable,
            cmp.fac_mean,
            cmp.prd_mean,
            cmp.z_mean,
            cmp.fac_std,
            cmp.prd_std,
            cmp.std_rel_error,
            if cmp.pass { "pass" } else { "FAIL" }
        );
    }
    println!("  wrote {}", out_dir.join("sample.json").display());

    if !pass {
        return Err(CliError::Numerical(
            "factual estimators failed the statistical criteria".into(),
        ));
    }
    Ok(())
}

/// `sweep`: evaluate the scenario over the configured width grid and emit
/// the indicator table.
pub fn sweep(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let max_width = cfg
        .sweep_gammas
        .iter()
        .chain(&cfg.sweep_lambdas)
        .fold(0.0f64, |m, w| m.max(*w));
    let grid = scenario_grid(cfg, &[max_width])?;
    let psi = synthesize(&cfg.state, &grid, &cfg.constants)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let fields_in = fields_from_wavefunction(&psi, &cfg.constants);

    let pairs: Vec<(f64, f64)> = cfg
        .sweep_gammas
        .iter()
        .flat_map(|&g| cfg.sweep_lambdas.iter().map(move |&l| (g, l)))
        .collect();

    let rows: Vec<SweepRow> = pairs
        .par_iter()
        .map(|&(g, l)| {
            let gamma = KernelSpec::from_width(g).map_err(classify)?;
            let lambda = KernelSpec::from_width(l).map_err(classify)?;
            let eval = evaluate_on_grid(cfg, &grid, &gamma, &lambda, &fields_in)?;
            Ok(SweepRow {
                gamma: g,
                lambda: l,
                eps_mean_x: eval.indicators.eps_mean_x,
                eps_mean_p: eval.indicators.eps_mean_p,
                eps_corr_xp: eval.indicators.eps_corr_xp,
                eps_std_x: eval.indicators.eps_std_x,
                eps_std_p: eval.indicators.eps_std_p,
                w: eval.indicators.w,
                rsur_margin_in: rsur_margin(&eval.set_in, &cfg.constants),
                rsur_margin_out: rsur_margin(&eval.set_out, &cfg.constants),
                pass: eval.checks_pass(),
            })
        })
        .collect::<Result<_, CliError>>()?;

    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    write(&out_dir.join("sweep.csv"), &sweep_csv(&rows))?;

    println!("sweep: {} rows", rows.len());
    println!("  gamma   lambda  eps(dx)       eps(dp)       W             pass");
    for row in &rows {
        println!(
            "  {:<7} {:<7} {:<13.6e} {:<13.6e} {:<13.6e} {}",
            row.gamma, row.lambda, row.eps_std_x, row.eps_std_p, row.w, row.pass
        );
    }
    println!("  wrote {}", out_dir.join("sweep.csv").display());

    if rows.iter().any(|r| !r.pass) {
        return Err(CliError::Numerical("one or more sweep rows failed their checks".into()));
    }
    Ok(())
}

/// `calibrate`: recover channel widths from observed out-reading
/// estimators.
pub fn calibrate(cfg: &Config, out_dir: &Path) -> Result<(), CliError> {
    let Some(observed) = cfg.observed else {
        return Err(CliError::Config(
            "the calibrate command needs an observed block (observed.std_x, optionally observed.std_p)".into(),
        ));
    };
    let packet = cfg
        .state
        .packet(&cfg.constants)
        .map_err(|e| CliError::Config(e.to_string()))?;

    // Infeasible or unidentifiable observations are configuration-class
    // failures: the inputs cannot have come from this scenario family.
    let fitted_gamma =
        fit_gamma(observed.std_x, packet.sigma).map_err(|e| CliError::Config(e.to_string()))?;
    let fitted_lambda = observed
        .std_p
        .map(|std_p| {
            let params = oracle_params(cfg, fitted_gamma, 0.0)?;
            fit_lambda(std_p, &params).map_err(|e| CliError::Config(e.to_string()))
        })
        .transpose()?;

    let report = CalibrationReport {
        scenario: scenario_json(cfg),
        observed_std_x: observed.std_x,
        fitted_gamma,
        observed_std_p: observed.std_p,
        fitted_lambda,
    };
    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    write(&out_dir.join("calibration.json"), &to_json(&report)?)?;

    match fitted_lambda {
        Some(lambda) => println!("calibrate: gamma = {fitted_gamma:.12}, lambda = {lambda:.12}"),
        None => println!("calibrate: gamma = {fitted_gamma:.12}"),
    }
    println!("  wrote {}", out_dir.join("calibration.json").display());
    Ok(())
}
