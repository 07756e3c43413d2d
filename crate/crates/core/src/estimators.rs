//! Probabilistic estimators of position, momentum, and energy computed
//! from the density/current pair, and the predicted uncertainty indicators
//! built from an in/out pair of estimator sets.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{
    wavefunction_from_fields, Constants, ProbabilityFields, WaveFunction, DENSITY_FLOOR,
    DENSITY_TAIL_CUT,
};

/// Mean values, correlation, and standard deviations for one reading.
///
/// Energy estimators are present only for oscillator scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSet {
    pub mean_x: f64,
    pub mean_p: f64,
    pub std_x: f64,
    pub std_p: f64,
    /// Position-momentum correlation; imaginary-valued (hbar/2 i) for every
    /// in-scope state, kept complex without symmetrization.
    pub corr_xp: Complex64,
    pub mean_h: Option<f64>,
    pub std_h: Option<f64>,
}

/// Predicted uncertainty indicators: absolute in/out differences of the
/// estimators, plus the dimensionless product `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyIndicators {
    pub eps_mean_x: f64,
    pub eps_mean_p: f64,
    pub eps_corr_xp: f64,
    pub eps_std_x: f64,
    pub eps_std_p: f64,
    pub eps_mean_h: Option<f64>,
    pub eps_std_h: Option<f64>,
    /// `eps_std_x * eps_std_p / hbar`.
    pub w: f64,
}

/// Second moment of momentum evaluated directly from the fields:
/// `hbar^2 * integral (d sqrt(rho)/dx)^2 + m^2 * integral j^2 / rho`,
/// with the second integrand cut off where the density falls below the
/// relative tail threshold.
pub fn momentum_second_moment_from_fields(
    fields: &ProbabilityFields,
    constants: &Constants,
) -> f64 {
    let grid = fields.grid();
    let sqrt_rho: Vec<f64> = fields.rho().iter().map(|r| r.sqrt()).collect();
    let dsqrt = grid.derivative(&sqrt_rho);
    let gradient_term: Vec<f64> = dsqrt.iter().map(|d| d * d).collect();

    let rho_max = fields.rho().iter().fold(0.0f64, |m, r| m.max(*r));
    let cut = DENSITY_TAIL_CUT * rho_max;
    let flow_term: Vec<f64> = fields
        .rho()
        .iter()
        .zip(fields.j())
        .map(|(&r, &j)| {
            if r < cut {
                0.0
            } else {
                j * j / r.max(DENSITY_FLOOR)
            }
        })
        .collect();

    let h2 = constants.hbar * constants.hbar;
    let m2 = constants.mass * constants.mass;
    h2 * grid.integrate(&gradient_term) + m2 * grid.integrate(&flow_term)
}

/// Second moment of momentum evaluated as the inner product
/// `integral |p_hat psi|^2` on a reconstructed wavefunction. Serves as the
/// independent check of [`momentum_second_moment_from_fields`].
pub fn momentum_second_moment_from_wavefunction(
    psi: &WaveFunction,
    constants: &Constants,
) -> f64 {
    let grid = psi.grid();
    let dmod = grid.derivative(psi.modulus());
    let dphase = grid.phase_gradient(psi.phase());
    // |psi'|^2 = (|psi|')^2 + |psi|^2 (phi')^2 in polar form.
    let integrand: Vec<f64> = psi
        .modulus()
        .iter()
        .zip(dmod.iter().zip(&dphase))
        .map(|(&m, (&dm, &dp))| dm * dm + m * m * dp * dp)
        .collect();
    constants.hbar * constants.hbar * grid.integrate(&integrand)
}

/// Apply the oscillator Hamiltonian to a wavefunction:
/// `H psi = -hbar^2/(2m) psi'' + (m omega^2 / 2) x^2 psi`.
fn apply_hamiltonian(psi: &WaveFunction, constants: &Constants, omega: f64) -> Vec<Complex64> {
    let grid = psi.grid();
    let samples = psi.samples();
    let re: Vec<f64> = samples.iter().map(|c| c.re).collect();
    let im: Vec<f64> = samples.iter().map(|c| c.im).collect();
    let d2re = grid.second_derivative(&re);
    let d2im = grid.second_derivative(&im);
    let kinetic = -constants.hbar * constants.hbar / (2.0 * constants.mass);
    let spring = 0.5 * constants.mass * omega * omega;
    (0..grid.n())
        .map(|i| {
            let x = grid.x(i);
            let potential = spring * x * x;
            Complex64::new(
                kinetic * d2re[i] + potential * re[i],
                kinetic * d2im[i] + potential * im[i],
            )
        })
        .collect()
}

/// Compute the estimator set of a field pair.
///
/// Position moments come from the density, the momentum mean from the
/// current quadrature, the momentum spread from the direct field
/// substitution, and the correlation from the density gradient and the
/// current. When `oscillator_omega` is given, energy estimators are
/// evaluated on the reconstructed wavefunction.
pub fn estimate(
    fields: &ProbabilityFields,
    constants: &Constants,
    oscillator_omega: Option<f64>,
) -> Result<EstimatorSet> {
    let grid = fields.grid();
    let x = grid.positions();
    let rho = fields.rho();
    let j = fields.j();

    let mean_x = grid.integrate(&x.iter().zip(rho).map(|(x, r)| x * r).collect::<Vec<_>>());
    let var_x = grid.integrate(
        &x.iter()
            .zip(rho)
            .map(|(x, r)| (x - mean_x) * (x - mean_x) * r)
            .collect::<Vec<_>>(),
    );
    let std_x = var_x.max(0.0).sqrt();

    let mean_p = constants.mass * grid.integrate(j);
    let p2 = momentum_second_moment_from_fields(fields, constants);
    let std_p = (p2 - mean_p * mean_p).max(0.0).sqrt();

    // Correlation of x and p through the field substitution:
    // real part from (x - <x>) j, imaginary part from (x - <x>) rho'.
    let drho = grid.derivative(rho);
    let corr_re = constants.mass
        * grid.integrate(&x.iter().zip(j).map(|(x, v)| (x - mean_x) * v).collect::<Vec<_>>());
    let corr_im = -0.5
        * constants.hbar
        * grid.integrate(
            &x.iter()
                .zip(&drho)
                .map(|(x, d)| (x - mean_x) * d)
                .collect::<Vec<_>>(),
        );
    let corr_xp = Complex64::new(corr_re, corr_im);

    let (mean_h, std_h) = match oscillator_omega {
        None => (None, None),
        Some(omega) => {
            let psi = wavefunction_from_fields(fields, constants)?;
            let h_psi = apply_hamiltonian(&psi, constants, omega);
            let samples = psi.samples();
            let mean_integrand: Vec<f64> = samples
                .iter()
                .zip(&h_psi)
                .map(|(c, h)| (c.conj() * h).re)
                .collect();
            let mean = grid.integrate(&mean_integrand);
            let second_integrand: Vec<f64> = h_psi.iter().map(|h| h.norm_sqr()).collect();
            let second = grid.integrate(&second_integrand);
            (Some(mean), Some((second - mean * mean).max(0.0).sqrt()))
        }
    };

    Ok(EstimatorSet {
        mean_x,
        mean_p,
        std_x,
        std_p,
        corr_xp,
        mean_h,
        std_h,
    })
}

/// Predicted uncertainty indicators from an in/out pair of estimator sets.
pub fn uncertainty_indicators(
    in_set: &EstimatorSet,
    out_set: &EstimatorSet,
    constants: &Constants,
) -> Result<UncertaintyIndicators> {
    let (eps_mean_h, eps_std_h) = match (
        in_set.mean_h,
        out_set.mean_h,
        in_set.std_h,
        out_set.std_h,
    ) {
        (None, None, None, None) => (None, None),
        (Some(mi), Some(mo), Some(si), Some(so)) => {
            (Some((mo - mi).abs()), Some((so - si).abs()))
        }
        _ => return Err(Error::MissingObservable),
    };
    let eps_std_x = (out_set.std_x - in_set.std_x).abs();
    let eps_std_p = (out_set.std_p - in_set.std_p).abs();
    Ok(UncertaintyIndicators {
        eps_mean_x: (out_set.mean_x - in_set.mean_x).abs(),
        eps_mean_p: (out_set.mean_p - in_set.mean_p).abs(),
        eps_corr_xp: (out_set.corr_xp - in_set.corr_xp).norm(),
        eps_std_x,
        eps_std_p,
        eps_mean_h,
        eps_std_h,
        w: eps_std_x * eps_std_p / constants.hbar,
    })
}

/// Diagnostic margin of the deviation product over the commutator bound
/// for x and p: `std_x * std_p - hbar / 2`.
pub fn rsur_margin(set: &EstimatorSet, constants: &Constants) -> f64 {
    set.std_x * set.std_p - 0.5 * constants.hbar
}
