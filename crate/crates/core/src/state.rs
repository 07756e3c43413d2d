//! State synthesis and conversion between a wavefunction and its
//! measurable field pair: probability density and probability current.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid1D};

/// Relative density level below which a point is treated as unsupported:
/// the current there contributes no phase and no momentum-moment mass.
pub const DENSITY_TAIL_CUT: f64 = 1e-12;

/// Absolute floor preventing division underflow when dividing by the density.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Relative current level above which a sample counts as non-negligible
/// when deciding whether the phase is reconstructible.
const CURRENT_NEGLIGIBLE: f64 = 1e-6;

/// Scenario-level bound for the current-vs-density consistency check:
/// every valid field pair satisfies |j| <= c * sqrt(rho) with this c.
const CURRENT_BOUND: f64 = 1e3;

/// Tolerance on the unit-mass invariant of densities and wavefunctions.
const NORM_TOL: f64 = 1e-8;

/// Default number of grid points for automatically sized grids.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Default half-span of an automatic grid, in units of the combined width.
pub const DEFAULT_SPAN_FACTOR: f64 = 10.0;

/// Physical constants of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub mass: f64,
}

impl Constants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0 && mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidConstants { hbar, mass });
        }
        Ok(Self { hbar, mass })
    }

    /// Natural units: hbar = mass = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// What state to synthesize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    /// Gaussian packet centered at `x0` with spatial width `sigma` and a
    /// linear phase of slope `k`.
    GaussianPacket { x0: f64, sigma: f64, k: f64 },
    /// Harmonic-oscillator ground state of pulsation `omega`; equivalent to
    /// a Gaussian packet with x0 = 0, k = 0, sigma = sqrt(hbar / (2 m omega)).
    OscillatorGround { omega: f64 },
}

/// The packet parameters a state spec reduces to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub x0: f64,
    pub sigma: f64,
    pub k: f64,
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::GaussianPacket { x0, sigma, k } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidStateSpec(format!(
                        "sigma = {sigma} (must be finite and > 0)"
                    )));
                }
                if !(x0.is_finite() && k.is_finite()) {
                    return Err(Error::InvalidStateSpec(format!(
                        "x0 = {x0}, k = {k} (must be finite)"
                    )));
                }
            }
            StateSpec::OscillatorGround { omega } => {
                if !(omega.is_finite() && omega > 0.0) {
                    return Err(Error::InvalidStateSpec(format!(
                        "omega = {omega} (must be finite and > 0)"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reduce to Gaussian-packet parameters.
    pub fn packet(&self, constants: &Constants) -> Result<PacketParams> {
        self.validate()?;
        Ok(match *self {
            StateSpec::GaussianPacket { x0, sigma, k } => PacketParams { x0, sigma, k },
            StateSpec::OscillatorGround { omega } => PacketParams {
                x0: 0.0,
                sigma: (constants.hbar / (2.0 * constants.mass * omega)).sqrt(),
                k: 0.0,
            },
        })
    }

    /// Oscillator pulsation, when this spec is an oscillator ground state.
    pub fn omega(&self) -> Option<f64> {
        match *self {
            StateSpec::OscillatorGround { omega } => Some(omega),
            StateSpec::GaussianPacket { .. } => None,
        }
    }
}

/// Complex wavefunction samples on a grid, stored as modulus and
/// (unwrapped) phase.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    modulus: Vec<f64>,
    phase: Vec<f64>,
}

impl WaveFunction {
    /// Assemble a wavefunction from modulus and phase samples, checking the
    /// unit-norm and finiteness invariants.
    pub fn from_polar(grid: Grid1D, modulus: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if modulus.len() != grid.n() || phase.len() != grid.n() {
            return Err(Error::InvalidFields(
                "sample count must match the grid".into(),
            ));
        }
        if modulus.iter().any(|m| !m.is_finite() || *m < 0.0)
            || phase.iter().any(|p| !p.is_finite())
        {
            return Err(Error::InvalidFields(
                "wavefunction samples must be finite with non-negative modulus".into(),
            ));
        }
        let psi = Self { grid, modulus, phase };
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidFields(format!(
                "wavefunction norm {norm} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(psi)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn modulus(&self) -> &[f64] {
        &self.modulus
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Complex samples `modulus * exp(i phase)`.
    pub fn samples(&self) -> Vec<Complex64> {
        self.modulus
            .iter()
            .zip(&self.phase)
            .map(|(&m, &p)| Complex64::from_polar(m, p))
            .collect()
    }

    /// Quadrature of |psi|^2 over the grid.
    pub fn norm(&self) -> f64 {
        let density: Vec<f64> = self.modulus.iter().map(|m| m * m).collect();
        self.grid.integrate(&density)
    }
}

/// The measurable content of a state: density `rho` and current `j`
/// sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityFields {
    grid: Grid1D,
    rho: Vec<f64>,
    j: Vec<f64>,
}

impl ProbabilityFields {
    /// Assemble a field pair, checking non-negativity, unit mass, and the
    /// current-vs-density consistency bound.
    pub fn new(grid: Grid1D, rho: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.n() || j.len() != grid.n() {
            return Err(Error::InvalidFields(
                "sample count must match the grid".into(),
            ));
        }
        if rho.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidFields(
                "density must be finite and non-negative everywhere".into(),
            ));
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFields("current must be finite".into()));
        }
        // Scale-invariant form of the |j| <= c sqrt(rho) bound: the current
        // must fade at least as fast as the square root of the density.
        let rho_max = rho.iter().fold(0.0f64, |m, r| m.max(*r));
        let j_max = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rho_max > 0.0 && j_max > 0.0 {
            for (r, v) in rho.iter().zip(&j) {
                if v.abs() > CURRENT_BOUND * (r / rho_max).sqrt() * j_max {
                    return Err(Error::InvalidFields(format!(
                        "current {v} is not negligible where the density is {r}"
                    )));
                }
            }
        }
        let fields = Self { grid, rho, j };
        let mass = fields.grid.integrate(&fields.rho);
        if (mass - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidFields(format!(
                "density mass {mass} deviates from 1 beyond {NORM_TOL}"
            )));
        }
        Ok(fields)
    }

    /// Assemble a field pair without the validity checks. Intended for
    /// synthetic test data (scaled or mixed densities).
    pub fn new_unchecked(grid: Grid1D, rho: Vec<f64>, j: Vec<f64>) -> Self {
        assert_eq!(rho.len(), grid.n());
        assert_eq!(j.len(), grid.n());
        Self { grid, rho, j }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn j(&self) -> &[f64] {
        &self.j
    }
}

/// Build a grid adapted to a state and the kernels that will act on it:
/// centered on the packet, spanning `DEFAULT_SPAN_FACTOR` combined widths
/// on each side, with the default point count.
pub fn auto_grid(spec: &StateSpec, kernel_widths: &[f64], constants: &Constants) -> Result<Grid1D> {
    auto_grid_custom(
        spec,
        kernel_widths,
        constants,
        DEFAULT_GRID_POINTS,
        DEFAULT_SPAN_FACTOR,
    )
}

/// [`auto_grid`] with an explicit point count (a power of two, at least 1024)
/// and span factor (at least 8 so synthesis stays well covered).
pub fn auto_grid_custom(
    spec: &StateSpec,
    kernel_widths: &[f64],
    constants: &Constants,
    n: usize,
    span_factor: f64,
) -> Result<Grid1D> {
    if n < 1024 || !n.is_power_of_two() {
        return Err(Error::InvalidGridPoints(n));
    }
    if !(span_factor.is_finite() && span_factor >= 8.0) {
        return Err(Error::InvalidStateSpec(format!(
            "span factor {span_factor} must be finite and >= 8"
        )));
    }
    let packet = spec.packet(constants)?;
    let max_width = kernel_widths.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let half_span = span_factor * (packet.sigma * packet.sigma + max_width * max_width).sqrt();
    make_grid(packet.x0 - half_span, packet.x0 + half_span, n)
}

/// Synthesize the wavefunction of a state spec on a grid.
///
/// The grid must cover at least eight widths on each side of the packet
/// center; the result is renormalized so its quadrature norm is 1.
pub fn synthesize(spec: &StateSpec, grid: &Grid1D, constants: &Constants) -> Result<WaveFunction> {
    let packet = spec.packet(constants)?;
    let required = 8.0 * packet.sigma;
    let available = (packet.x0 - grid.x_min()).min(grid.x_max() - packet.x0);
    if available < required * (1.0 - 1e-12) {
        return Err(Error::GridTooSmall { required, available });
    }

    let prefactor = (2.0 * std::f64::consts::PI * packet.sigma * packet.sigma).powf(-0.25);
    let mut modulus: Vec<f64> = (0..grid.n())
        .map(|i| {
            let u = grid.x(i) - packet.x0;
            prefactor * (-u * u / (4.0 * packet.sigma * packet.sigma)).exp()
        })
        .collect();
    let density: Vec<f64> = modulus.iter().map(|m| m * m).collect();
    let scale = grid.integrate(&density).sqrt().recip();
    for m in &mut modulus {
        *m *= scale;
    }
    let phase: Vec<f64> = (0..grid.n()).map(|i| packet.k * grid.x(i)).collect();
    WaveFunction::from_polar(*grid, modulus, phase)
}

/// Extract the density/current pair of a wavefunction:
/// `rho = |psi|^2` and `j = (hbar/m) rho * dphi/dx`.
pub fn fields_from_wavefunction(psi: &WaveFunction, constants: &Constants) -> ProbabilityFields {
    let grid = *psi.grid();
    let rho: Vec<f64> = psi.modulus().iter().map(|m| m * m).collect();
    let grad = grid.phase_gradient(psi.phase());
    let scale = constants.hbar / constants.mass;
    let j: Vec<f64> = rho.iter().zip(&grad).map(|(&r, &g)| scale * r * g).collect();
    ProbabilityFields { grid, rho, j }
}

/// Reconstruct a wavefunction from a field pair.
///
/// The modulus is `sqrt(rho)`; the phase is the cumulative midpoint
/// integral of `m j / (hbar rho)` anchored to zero at the left edge, so
/// extracting fields again reproduces the inputs on the supported region.
/// Points with `rho` below the tail cut contribute no phase increment:
/// the phase is held flat across them, and the integration re-anchors at
/// the next supported stretch.
pub fn wavefunction_from_fields(
    fields: &ProbabilityFields,
    constants: &Constants,
) -> Result<WaveFunction> {
    let grid = *fields.grid();
    let rho = fields.rho();
    let j = fields.j();

    let rho_max = rho.iter().fold(0.0f64, |m, r| m.max(*r));
    if rho_max <= 0.0 {
        return Err(Error::DegenerateDensity);
    }
    let j_max = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rho_cut = DENSITY_TAIL_CUT * rho_max;
    if j_max > 0.0 {
        let j_cut = CURRENT_NEGLIGIBLE * j_max;
        if rho.iter().zip(j).any(|(&r, &v)| r < rho_cut && v.abs() > j_cut) {
            return Err(Error::IllDefinedPhase);
        }
    }

    let scale = constants.mass / constants.hbar;
    let u: Vec<f64> = rho
        .iter()
        .zip(j)
        .map(|(&r, &v)| scale * v / r.max(DENSITY_FLOOR))
        .collect();
    let supported: Vec<bool> = rho.iter().map(|&r| r >= rho_cut).collect();
    let phase = segmented_phase(&grid, &u, &supported);
    let modulus: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    WaveFunction::from_polar(grid, modulus, phase)
}

/// Midpoint phase integration restricted to supported stretches of the
/// grid, holding the phase flat across unsupported ones.
///
/// Each stretch runs the same two-chain midpoint recurrence as
/// [`Grid1D::phase_from_gradient`], re-anchored at the level carried in
/// from the left. One extra point on each side of a stretch is written so
/// the central-difference relation holds exactly at the stretch edges.
fn segmented_phase(grid: &Grid1D, u: &[f64], supported: &[bool]) -> Vec<f64> {
    let n = grid.n();
    let dx = grid.dx();
    let mut phi = vec![0.0; n];
    let mut carry = 0.0;
    let mut i = 0;
    while i < n {
        if !supported[i] {
            phi[i] = carry;
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i;
        while end + 1 < n && supported[end + 1] {
            end += 1;
        }
        phi[start] = carry;
        if start < end {
            phi[start + 1] = carry + 0.5 * dx * (u[start] + u[start + 1]);
            for m in start + 1..end {
                phi[m + 1] = phi[m - 1] + 2.0 * dx * u[m];
            }
            // Extend one point outward so differentiating at the stretch
            // edges still returns u exactly; both points are unsupported.
            if start > 0 {
                phi[start - 1] = phi[start + 1] - 2.0 * dx * u[start];
            }
            if end + 1 < n {
                phi[end + 1] = phi[end - 1] + 2.0 * dx * u[end];
                carry = phi[end + 1];
                i = end + 2;
                continue;
            }
        }
        carry = phi[end];
        i = end + 1;
    }
    phi
}

/// Total probability: trapezoidal quadrature of the density.
pub fn total_probability(fields: &ProbabilityFields) -> f64 {
    fields.grid().integrate(fields.rho())
}
