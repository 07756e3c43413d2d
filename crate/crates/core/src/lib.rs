//! Numerical simulator of quantum measurement modeled as linear
//! transformations of the probability density and current.
//!
//! A 1D state is synthesized as a wavefunction, reduced to its measurable
//! field pair (density rho, current j), and pushed through a measurement
//! channel: one row-stochastic kernel transforms the density, another the
//! current. Probabilistic estimators (means, spreads, the x-p correlation,
//! oscillator energies) are evaluated on both readings, their absolute
//! in/out differences form the predicted uncertainty indicators, and
//! seeded statistical sampling produces the factual estimators they are
//! compared with. Closed-form results for the Gaussian scenario serve as
//! the test oracle, and a calibration module inverts the estimator
//! formulas to recover channel widths.
//!
//! ```
//! use rhoj_core::{
//!     auto_grid, estimate, fields_from_wavefunction, measure, synthesize,
//!     uncertainty_indicators, Constants, KernelSpec, StateSpec,
//! };
//!
//! let constants = Constants::natural();
//! let state = StateSpec::GaussianPacket { x0: 0.0, sigma: 1.0, k: 2.0 };
//! let gamma = KernelSpec::Gaussian { width: 0.5 };
//! let lambda = KernelSpec::Gaussian { width: 0.5 };
//!
//! let grid = auto_grid(&state, &[0.5], &constants)?;
//! let psi = synthesize(&state, &grid, &constants)?;
//! let fields_in = fields_from_wavefunction(&psi, &constants);
//! let fields_out = measure(&fields_in, &gamma, &lambda, &grid)?;
//!
//! let set_in = estimate(&fields_in, &constants, None)?;
//! let set_out = estimate(&fields_out, &constants, None)?;
//! let indicators = uncertainty_indicators(&set_in, &set_out, &constants)?;
//!
//! // The position spread grows from sigma to sqrt(sigma^2 + gamma^2).
//! assert!((indicators.eps_std_x - (1.25f64.sqrt() - 1.0)).abs() < 1e-6);
//! assert!(indicators.eps_mean_x < 1e-8);
//! # Ok::<(), rhoj_core::Error>(())
//! ```

pub mod calibration;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod sampling;
pub mod state;
pub mod transform;

pub use error::{Error, Result};
pub use estimators::{
    estimate, rsur_margin, uncertainty_indicators, EstimatorSet, UncertaintyIndicators,
};
pub use grid::{make_grid, Grid1D};
pub use kernel::{discretize, evaluate_kernel, verify_normalization, DiscretizedKernel, KernelSpec};
pub use oracle::{ScenarioParams, StdPForm};
pub use sampling::{
    compare_fac_vs_prd, draw_momentum_samples, draw_position_samples, factual_estimators,
    joint_correlation, spectrum_estimators, FactualEstimators, SampleBatch, SpectrumHistogram,
};
pub use state::{
    auto_grid, fields_from_wavefunction, synthesize, total_probability, wavefunction_from_fields,
    Constants, ProbabilityFields, StateSpec, WaveFunction,
};
pub use transform::{measure, transform_current, transform_density};
