//! Statistical-sampling simulation of measurement: seeded draws from the
//! out-state distributions, factual estimators over the trials, spectrum
//! histograms, and the factual-vs-predicted comparison.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::state::{wavefunction_from_fields, Constants, ProbabilityFields};

/// Zero-padding factor for the momentum-space density; refines the
/// momentum grid so quantization stays far below sampling error.
const MOMENTUM_PAD: usize = 8;

/// Factual-vs-predicted acceptance: the mean must sit within this many
/// standard errors of the prediction.
pub const Z_MEAN_MAX: f64 = 5.0;

/// Factual-vs-predicted acceptance: relative deviation bound between the
/// sample spread and the predicted spread.
pub const STD_REL_MAX: f64 = 0.03;

/// Trial outcomes of one sampling run, reproducible from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
    seed: u64,
    n_trials: usize,
}

impl SampleBatch {
    /// Wrap raw trial values (mostly for tests); requires at least two
    /// finite values.
    pub fn from_values(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::BatchTooSmall(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFields("trial values must be finite".into()));
        }
        let n_trials = values.len();
        Ok(Self { values, seed, n_trials })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }
}

/// Sample statistics over one batch: mean and spread (divisor N), plus the
/// uncertainty indicators of those two estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactualEstimators {
    pub mean: f64,
    pub std: f64,
    /// Standard error of the mean: `std / sqrt(N)`.
    pub eps_mean: f64,
    /// Fourth root of the variance of the squared spread:
    /// `((m4 - m2^2) / N)^(1/4)` with central sample moments m2, m4.
    pub eps_std: f64,
}

/// Selection frequencies over the distinct representative values of a
/// batch: midpoints of uniformly binned samples, empty bins dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumHistogram {
    bin_values: Vec<f64>,
    frequencies: Vec<f64>,
    lo: f64,
    width: f64,
    n_bins: usize,
}

/// Outcome of a factual-vs-predicted comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// Distance of the sample mean from the prediction, in standard errors.
    pub z_mean: f64,
    /// Relative deviation of the sample spread from the predicted spread.
    pub std_rel_error: f64,
    /// Set when the predicted spread is zero but the sample spread is not.
    pub degenerate: bool,
    pub pass: bool,
}

/// Inverse-transform sampler over a piecewise-linear density on a point set.
struct InverseCdf {
    points: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(points: Vec<f64>, raw_density: &[f64]) -> Result<Self> {
        assert_eq!(points.len(), raw_density.len());
        let n = points.len();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            let h = points[i] - points[i - 1];
            cdf[i] = cdf[i - 1] + 0.5 * h * (raw_density[i - 1] + raw_density[i]);
        }
        let total = cdf[n - 1];
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        let density: Vec<f64> = raw_density.iter().map(|d| d / total).collect();
        for c in &mut cdf {
            *c /= total;
        }
        cdf[n - 1] = 1.0;
        Ok(Self { points, density, cdf })
    }

    /// Map a uniform variate in [0, 1) to a sample position.
    fn invert(&self, v: f64) -> f64 {
        let n = self.points.len();
        // First index with cdf > v; cell (idx - 1, idx) contains v.
        let idx = self.cdf.partition_point(|c| *c <= v).min(n - 1);
        if idx == 0 {
            return self.points[0];
        }
        let i = idx - 1;
        let h = self.points[i + 1] - self.points[i];
        let c = (v - self.cdf[i]) / h;
        let d0 = self.density[i];
        let slope = self.density[i + 1] - d0;
        // Solve d0 t + slope t^2 / 2 = c on [0, 1], stable as slope -> 0.
        let disc = (d0 * d0 + 2.0 * slope * c).max(0.0).sqrt();
        let denom = d0 + disc;
        let t = if denom > 0.0 { (2.0 * c / denom).clamp(0.0, 1.0) } else { 0.0 };
        self.points[i] + t * h
    }
}

fn draw(icdf: &InverseCdf, n_trials: usize, seed: u64) -> Result<SampleBatch> {
    if n_trials < 2 {
        return Err(Error::BatchTooSmall(n_trials));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n_trials).map(|_| icdf.invert(rng.random::<f64>())).collect();
    Ok(SampleBatch { values, seed, n_trials })
}

/// Draw position trials from the density by inverse-transform sampling of
/// its cumulative quadrature. Deterministic for a given seed.
pub fn draw_position_samples(
    fields: &ProbabilityFields,
    n_trials: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let icdf = InverseCdf::new(fields.grid().positions(), fields.rho())?;
    draw(&icdf, n_trials, seed)
}

/// Momentum-space density of a field pair: the squared modulus of the
/// Fourier transform of the reconstructed wavefunction, normalized by
/// quadrature. Returns ascending momentum points and the density on them.
pub fn momentum_distribution(
    fields: &ProbabilityFields,
    constants: &Constants,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let psi = wavefunction_from_fields(fields, constants)?;
    let grid = psi.grid();
    let n = grid.n();
    let size = (n * MOMENTUM_PAD).next_power_of_two();

    let mut buf: Vec<Complex64> = Vec::with_capacity(size);
    buf.extend(psi.samples());
    buf.resize(size, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut buf);

    let dp = 2.0 * std::f64::consts::PI * constants.hbar / (size as f64 * grid.dx());
    let half = size / 2;
    let mut points = Vec::with_capacity(size);
    let mut density = Vec::with_capacity(size);
    // Negative frequencies first so the momentum axis ascends.
    let negative = buf[half + 1..]
        .iter()
        .enumerate()
        .map(|(i, c)| ((half + 1 + i) as f64 - size as f64, c));
    let positive = buf[..=half].iter().enumerate().map(|(l, c)| (l as f64, c));
    for (index, c) in negative.chain(positive) {
        points.push(index * dp);
        density.push(c.norm_sqr());
    }
    let grid_like = crate::grid::make_grid(points[0], points[size - 1], size)?;
    let total = grid_like.integrate(&density);
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::DegenerateDensity);
    }
    for d in &mut density {
        *d /= total;
    }
    Ok((points, density))
}

/// Draw momentum trials from the momentum-space density of the
/// reconstructed wavefunction. Deterministic for a given seed.
pub fn draw_momentum_samples(
    fields: &ProbabilityFields,
    n_trials: usize,
    seed: u64,
    constants: &Constants,
) -> Result<SampleBatch> {
    let (points, density) = momentum_distribution(fields, constants)?;
    let icdf = InverseCdf::new(points, &density)?;
    draw(&icdf, n_trials, seed)
}

/// Sample mean and spread, with their uncertainty indicators. Divisor N
/// throughout (population convention).
pub fn factual_estimators(batch: &SampleBatch) -> FactualEstimators {
    let n = batch.n_trials as f64;
    let mean = batch.values.iter().sum::<f64>() / n;
    let m2 = batch.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let m4 = batch
        .values
        .iter()
        .map(|v| {
            let d = (v - mean) * (v - mean);
            d * d
        })
        .sum::<f64>()
        / n;
    let std = m2.sqrt();
    FactualEstimators {
        mean,
        std,
        eps_mean: std / n.sqrt(),
        eps_std: ((m4 - m2 * m2).max(0.0) / n).powf(0.25),
    }
}

/// Sample covariance of two equally long batches (divisor N).
pub fn joint_correlation(batch_a: &SampleBatch, batch_b: &SampleBatch) -> Result<f64> {
    if batch_a.n_trials != batch_b.n_trials {
        return Err(Error::LengthMismatch(batch_a.n_trials, batch_b.n_trials));
    }
    let n = batch_a.n_trials as f64;
    let mean_a = batch_a.values.iter().sum::<f64>() / n;
    let mean_b = batch_b.values.iter().sum::<f64>() / n;
    Ok(batch_a
        .values
        .iter()
        .zip(&batch_b.values)
        .map(|(a, b)| (a - mean_a) * (b - mean_b))
        .sum::<f64>()
        / n)
}

/// Bin a batch into uniform bins over the sample range and return the
/// selection frequencies over the bin midpoints, empty bins dropped.
pub fn spectrum_estimators(batch: &SampleBatch, n_bins: usize) -> Result<SpectrumHistogram> {
    if n_bins == 0 {
        return Err(Error::EmptyBinning);
    }
    let lo = batch.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = batch.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = batch.n_trials as f64;

    if hi == lo {
        // Degenerate range: a single representative value.
        return Ok(SpectrumHistogram {
            bin_values: vec![lo],
            frequencies: vec![1.0],
            lo,
            width: 0.0,
            n_bins: 1,
        });
    }

    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for v in &batch.values {
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let mut bin_values = Vec::new();
    let mut frequencies = Vec::new();
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 {
            bin_values.push(lo + (idx as f64 + 0.5) * width);
            frequencies.push(c as f64 / n);
        }
    }
    Ok(SpectrumHistogram {
        bin_values,
        frequencies,
        lo,
        width,
        n_bins,
    })
}

impl SpectrumHistogram {
    pub fn bin_values(&self) -> &[f64] {
        &self.bin_values
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Frequency-weighted mean over the spectrum.
    pub fn mean(&self) -> f64 {
        self.bin_values
            .iter()
            .zip(&self.frequencies)
            .map(|(a, nu)| nu * a)
            .sum()
    }

    /// Frequency-weighted standard deviation over the spectrum.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        self.bin_values
            .iter()
            .zip(&self.frequencies)
            .map(|(a, nu)| nu * (a - mean) * (a - mean))
            .sum::<f64>()
            .sqrt()
    }

    /// Midpoint of the bin a value falls into, under the same binning.
    pub fn midpoint_of(&self, value: f64) -> f64 {
        if self.width == 0.0 {
            return self.lo;
        }
        let idx = (((value - self.lo) / self.width) as usize).min(self.n_bins - 1);
        self.lo + (idx as f64 + 0.5) * self.width
    }
}

/// Compare factual estimators against a prediction: the mean must sit
/// within [`Z_MEAN_MAX`] standard errors and the spread within
/// [`STD_REL_MAX`] relative.
pub fn compare_fac_vs_prd(
    fac: &FactualEstimators,
    prd_mean: f64,
    prd_std: f64,
) -> ComparisonReport {
    let mean_defect = (fac.mean - prd_mean).abs();
    let z_mean = if fac.eps_mean > 0.0 {
        mean_defect / fac.eps_mean
    } else if mean_defect == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let degenerate = prd_std == 0.0 && fac.std != 0.0;
    let std_rel_error = if prd_std != 0.0 {
        (fac.std - prd_std).abs() / prd_std
    } else if degenerate {
        f64::INFINITY
    } else {
        0.0
    };
    ComparisonReport {
        z_mean,
        std_rel_error,
        degenerate,
        pass: !degenerate && z_mean <= Z_MEAN_MAX && std_rel_error <= STD_REL_MAX,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::state::{auto_grid, fields_from_wavefunction, synthesize, StateSpec};
    use crate::transform::measure;

    const HM: Constants = Constants { hbar: 1.0, mass: 1.0 };
    const N: usize = 100_000;
    const SEED: u64 = 42;

    fn in_fields() -> ProbabilityFields {
        let spec = StateSpec::GaussianPacket { x0: 0.0, sigma: 1.0, k: 2.0 };
        let grid = auto_grid(&spec, &[0.5], &HM).unwrap();
        fields_from_wavefunction(&synthesize(&spec, &grid, &HM).unwrap(), &HM)
    }

    fn out_fields() -> ProbabilityFields {
        let fields = in_fields();
        let grid = *fields.grid();
        measure(
            &fields,
            &KernelSpec::Gaussian { width: 0.5 },
            &KernelSpec::Gaussian { width: 0.5 },
            &grid,
        )
        .unwrap()
    }

    #[test]
    fn position_sampling_recovers_the_out_distribution() {
        let batch = draw_position_samples(&out_fields(), N, SEED).unwrap();
        let fac = factual_estimators(&batch);
        let prd_std = 1.25f64.sqrt();
        assert!(fac.mean.abs() <= 5.0 * prd_std / (N as f64).sqrt());
        assert!((fac.std - prd_std).abs() <= 0.02 * prd_std);
    }

    #[test]
    fn sampling_is_deterministic() {
        let fields = out_fields();
        let a = draw_position_samples(&fields, 1000, 7).unwrap();
        let b = draw_position_samples(&fields, 1000, 7).unwrap();
        assert_eq!(a, b);
        let c = draw_position_samples(&fields, 1000, 8).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn single_trial_is_rejected() {
        assert!(matches!(
            draw_position_samples(&out_fields(), 1, SEED),
            Err(Error::BatchTooSmall(1))
        ));
    }

    #[test]
    fn momentum_sampling_recovers_mean_and_spread() {
        let batch = draw_momentum_samples(&in_fields(), N, SEED, &HM).unwrap();
        let fac = factual_estimators(&batch);
        // Mean momentum hbar k = 2, spread hbar / (2 sigma) = 0.5.
        assert!((fac.mean - 2.0).abs() <= 5.0 * 0.5 / (N as f64).sqrt());
        assert!((fac.std - 0.5).abs() <= 0.03 * 0.5);
    }

    #[test]
    fn momentum_density_of_a_real_state_is_symmetric() {
        let spec = StateSpec::GaussianPacket { x0: 0.0, sigma: 1.0, k: 0.0 };
        let grid = auto_grid(&spec, &[], &HM).unwrap();
        let fields = fields_from_wavefunction(&synthesize(&spec, &grid, &HM).unwrap(), &HM);
        let (points, density) = momentum_distribution(&fields, &HM).unwrap();
        let mean: f64 = points
            .iter()
            .zip(&density)
            .map(|(p, d)| p * d)
            .sum::<f64>();
        // Discrete symmetric density: the weighted mean collapses.
        assert!(mean.abs() < 1e-6);
        let batch = draw_momentum_samples(&fields, N, SEED, &HM).unwrap();
        let fac = factual_estimators(&batch);
        assert!(fac.mean.abs() <= 5.0 * 0.5 / (N as f64).sqrt());
    }

    #[test]
    fn factual_estimators_on_degenerate_batches() {
        let batch = SampleBatch::from_values(vec![3.0; 10], 0).unwrap();
        let fac = factual_estimators(&batch);
        assert_eq!(fac.std, 0.0);
        assert_eq!(fac.eps_mean, 0.0);

        let batch = SampleBatch::from_values(vec![0.0, 2.0], 0).unwrap();
        let fac = factual_estimators(&batch);
        assert_eq!(fac.mean, 1.0);
        assert_eq!(fac.std, 1.0);
        assert!((fac.eps_mean - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn joint_correlation_cases() {
        let a = SampleBatch::from_values(vec![1.0, 2.0, 4.0, -1.0], 0).unwrap();
        let var_a = factual_estimators(&a).std.powi(2);
        assert!((joint_correlation(&a, &a).unwrap() - var_a).abs() < 1e-14);

        let b = SampleBatch::from_values(a.values().iter().map(|v| 2.0 * v).collect(), 0).unwrap();
        assert!((joint_correlation(&a, &b).unwrap() - 2.0 * var_a).abs() < 1e-14);

        let short = SampleBatch::from_values(vec![0.0, 1.0], 0).unwrap();
        assert!(matches!(
            joint_correlation(&a, &short),
            Err(Error::LengthMismatch(4, 2))
        ));
    }

    #[test]
    fn independent_batches_decorrelate() {
        let x = draw_position_samples(&out_fields(), N, 11).unwrap();
        let p = draw_momentum_samples(&out_fields(), N, 12, &HM).unwrap();
        let fx = factual_estimators(&x);
        let fp = factual_estimators(&p);
        let cov = joint_correlation(&x, &p).unwrap();
        assert!(cov.abs() <= 5.0 * fx.std * fp.std / (N as f64).sqrt());
    }

    #[test]
    fn one_bin_histogram() {
        let batch = SampleBatch::from_values(vec![0.0, 1.0, 2.0, 3.0], 0).unwrap();
        let hist = spectrum_estimators(&batch, 1).unwrap();
        assert_eq!(hist.bin_values(), &[1.5]);
        assert_eq!(hist.frequencies(), &[1.0]);
    }

    #[test]
    fn frequencies_sum_to_one() {
        let batch = draw_position_samples(&out_fields(), 10_000, 3).unwrap();
        for n_bins in [1, 7, 64] {
            let hist = spectrum_estimators(&batch, n_bins).unwrap();
            let total: f64 = hist.frequencies().iter().sum();
            assert!((total - 1.0).abs() <= 1e-12);
            assert!(hist.frequencies().iter().all(|nu| *nu > 0.0));
            assert!(hist.bin_values().len() <= batch.n_trials());
        }
    }

    #[test]
    fn histogram_identities_match_binned_samples() {
        let batch = draw_position_samples(&out_fields(), N, SEED).unwrap();
        let hist = spectrum_estimators(&batch, 64).unwrap();
        let quantized = SampleBatch::from_values(
            batch.values().iter().map(|v| hist.midpoint_of(*v)).collect(),
            0,
        )
        .unwrap();
        let fac = factual_estimators(&quantized);
        assert!((hist.mean() - fac.mean).abs() <= 1e-12);
        assert!((hist.std() - fac.std).abs() <= 1e-12);

        // And the histogram mean stays within one bin width of the raw mean.
        let raw = factual_estimators(&batch);
        let bin_width = hist.bin_values()[1] - hist.bin_values()[0];
        assert!((hist.mean() - raw.mean).abs() <= bin_width);
    }

    #[test]
    fn comparison_report_thresholds() {
        let batch = draw_position_samples(&out_fields(), N, SEED).unwrap();
        let fac = factual_estimators(&batch);
        let prd_std = 1.25f64.sqrt();
        let report = compare_fac_vs_prd(&fac, 0.0, prd_std);
        assert!(report.pass, "{report:?}");

        // A mean shifted by ten standard errors fails.
        let shifted = FactualEstimators {
            mean: fac.mean + 10.0 * fac.eps_mean,
            ..fac
        };
        assert!(!compare_fac_vs_prd(&shifted, 0.0, prd_std).pass);

        // A zero predicted spread with a nonzero sample spread is flagged.
        let report = compare_fac_vs_prd(&fac, 0.0, 0.0);
        assert!(report.degenerate);
        assert!(!report.pass);
    }

    #[test]
    fn mean_error_shrinks_with_more_trials() {
        let fields = out_fields();
        let mut errors = Vec::new();
        for n in [1_000usize, 10_000, 100_000] {
            let fac = factual_estimators(&draw_position_samples(&fields, n, SEED).unwrap());
            errors.push(fac.mean.abs());
        }
        assert!(
            errors[2] < errors[0],
            "sampling error did not shrink: {errors:?}"
        );
    }
}
