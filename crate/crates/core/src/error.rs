//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid bounds: x_min = {x_min}, x_max = {x_max}, n = {n} (need x_max > x_min and n >= 16)")]
    InvalidBounds { x_min: f64, x_max: f64, n: usize },

    #[error("invalid grid point count {0}: automatic grids need a power of two >= 1024")]
    InvalidGridPoints(usize),

    #[error("invalid state spec: {0}")]
    InvalidStateSpec(String),

    #[error("invalid constants: hbar = {hbar}, mass = {mass} (both must be finite and > 0)")]
    InvalidConstants { hbar: f64, mass: f64 },

    #[error("grid too small: state needs {required} on each side of the packet center, grid provides {available}")]
    GridTooSmall { required: f64, available: f64 },

    #[error("invalid field data: {0}")]
    InvalidFields(String),

    #[error("phase is ill-defined: current is non-negligible where the density underflows")]
    IllDefinedPhase,

    #[error("degenerate density: no probability mass on the grid")]
    DegenerateDensity,

    #[error("invalid kernel spec: width = {0} (must be finite and > 0)")]
    InvalidKernelSpec(f64),

    #[error("ideal kernel has no pointwise density")]
    NoPointwiseForm,

    #[error("kernel under-resolved: width = {width} but grid spacing requires width >= {min_width}")]
    UnderResolvedKernel { width: f64, min_width: f64 },

    #[error("grid mismatch: kernel and fields must share one grid")]
    GridMismatch,

    #[error("missing observable: one estimator set carries energy estimators and the other does not")]
    MissingObservable,

    #[error("sample batch too small: n = {0} (need n >= 2)")]
    BatchTooSmall(usize),

    #[error("sample batches have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("histogram needs at least one bin")]
    EmptyBinning,

    #[error("closed form undefined: {0}")]
    DomainError(String),

    #[error("infeasible observation: observed spread {observed} is below the intrinsic width {intrinsic}")]
    InfeasibleObservation { observed: f64, intrinsic: f64 },

    #[error("width is unidentifiable: the current vanishes (k = 0), so the spread does not depend on it")]
    Unidentifiable,

    #[error("target {target} is outside the achievable range [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("calibration failed to converge: residual {residual} above tolerance {tolerance}")]
    ConvergenceFailure { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
