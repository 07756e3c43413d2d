//! Inverse problem: recover the measuring-device widths from observed
//! out-reading estimators of a known in-state.

use crate::error::{Error, Result};
use crate::oracle::{std_p_out, ScenarioParams, StdPForm};

/// Relative slack below which an observed spread slightly under the
/// intrinsic width is still treated as an ideal measurement.
const FEASIBILITY_SLACK: f64 = 1e-9;

/// Residual tolerance of the width fit.
const RESIDUAL_TOL: f64 = 1e-10;

/// Samples per branch for the monotonicity verification.
const MONOTONE_SAMPLES: usize = 33;

/// Recover the density-channel width from the observed position spread:
/// the out-reading variance is the intrinsic variance plus the squared
/// width, so `gamma = sqrt(std_x_out^2 - sigma^2)`.
pub fn fit_gamma(std_x_out: f64, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidStateSpec(format!(
            "sigma = {sigma} (must be finite and > 0)"
        )));
    }
    if !std_x_out.is_finite() || std_x_out < sigma * (1.0 - FEASIBILITY_SLACK) {
        return Err(Error::InfeasibleObservation {
            observed: std_x_out,
            intrinsic: sigma,
        });
    }
    Ok((std_x_out * std_x_out - sigma * sigma).max(0.0).sqrt())
}

/// Recover the current-channel width from the observed momentum spread,
/// with the packet parameters and the density-channel width already fixed.
///
/// The spread is V-shaped in the width: strictly decreasing up to
/// `lambda = gamma`, strictly increasing beyond it, and defined only for
/// `lambda < sqrt(sigma^2 + 2 gamma^2)`. Each monotone branch is verified
/// and bisected; when both branches contain a preimage the smaller width
/// is returned.
pub fn fit_lambda(std_p_out_target: f64, params: &ScenarioParams) -> Result<f64> {
    params.validate()?;
    if params.k == 0.0 {
        return Err(Error::Unidentifiable);
    }
    if !(std_p_out_target.is_finite() && std_p_out_target > 0.0) {
        return Err(Error::OutOfRange {
            target: std_p_out_target,
            min: 0.0,
            max: f64::INFINITY,
        });
    }

    let eval = |lambda: f64| -> Result<f64> {
        std_p_out(&ScenarioParams { lambda, ..*params }, StdPForm::Derived)
    };

    // The spread diverges at the feasibility boundary; cap just inside it.
    let lambda_sup = (params.sigma * params.sigma + 2.0 * params.gamma * params.gamma).sqrt();
    let lambda_hi = (10.0 * params.sigma).min(lambda_sup * (1.0 - FEASIBILITY_SLACK));
    let branch_point = params.gamma.min(lambda_hi);

    let mut roots: Vec<f64> = Vec::new();
    let branches = [(0.0, branch_point, false), (branch_point, lambda_hi, true)];
    for (lo, hi, increasing) in branches {
        if hi - lo <= 0.0 {
            continue;
        }
        verify_monotone(&eval, lo, hi, increasing)?;
        let f_lo = eval(lo)? - std_p_out_target;
        let f_hi = eval(hi)? - std_p_out_target;
        if f_lo == 0.0 {
            roots.push(lo);
            continue;
        }
        if f_hi == 0.0 {
            roots.push(hi);
            continue;
        }
        if f_lo * f_hi > 0.0 {
            continue;
        }
        roots.push(bisect(&eval, lo, hi, f_lo, std_p_out_target)?);
    }

    let root = roots.into_iter().fold(f64::INFINITY, f64::min);
    if !root.is_finite() {
        let min = eval(branch_point)?;
        let max = eval(lambda_hi)?.max(eval(0.0)?);
        return Err(Error::OutOfRange {
            target: std_p_out_target,
            min,
            max,
        });
    }
    let residual = (eval(root)? - std_p_out_target).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::ConvergenceFailure {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(root)
}

fn verify_monotone(
    eval: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    increasing: bool,
) -> Result<()> {
    let mut prev = eval(lo)?;
    for i in 1..MONOTONE_SAMPLES {
        let lambda = lo + (hi - lo) * i as f64 / (MONOTONE_SAMPLES - 1) as f64;
        let value = eval(lambda)?;
        let ok = if increasing { value >= prev } else { value <= prev };
        if !ok {
            return Err(Error::DomainError(format!(
                "spread is not monotone on [{lo}, {hi}] near lambda = {lambda}"
            )));
        }
        prev = value;
    }
    Ok(())
}

fn bisect(
    eval: &dyn Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    target: f64,
) -> Result<f64> {
    let mut sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval(mid)? - target;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
            sign_lo = f_mid.signum();
        } else {
            hi = mid;
        }
    }
    // Return whichever end evaluates closer to the target.
    let (f_lo, f_hi) = (eval(lo)? - target, eval(hi)? - target);
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}
