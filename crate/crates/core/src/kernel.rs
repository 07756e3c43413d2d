//! Measurement-channel kernels: Gaussian and ideal (Dirac) forms,
//! their row-stochastic discretization onto a grid, and normalization
//! verification.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Kernels are truncated this many widths away from the diagonal before
/// row renormalization; the Gaussian tail beyond it is below 2e-15.
pub const BAND_CUT_WIDTHS: f64 = 8.0;

/// A Gaussian kernel must span at least this many grid steps to be
/// resolvable.
pub const MIN_WIDTH_STEPS: f64 = 2.0;

/// Specification of a measurement channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// Stationary Gaussian smoothing of the given width.
    Gaussian { width: f64 },
    /// The Dirac limit: the channel reproduces its input.
    Ideal,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { width } => {
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::InvalidKernelSpec(width));
                }
                Ok(())
            }
            KernelSpec::Ideal => Ok(()),
        }
    }

    /// Width of the channel; zero for the ideal kernel.
    pub fn width(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { width } => width,
            KernelSpec::Ideal => 0.0,
        }
    }

    /// Interpret a width as a spec, treating zero as the ideal channel.
    pub fn from_width(width: f64) -> Result<Self> {
        if width == 0.0 {
            Ok(KernelSpec::Ideal)
        } else {
            let spec = KernelSpec::Gaussian { width };
            spec.validate()?;
            Ok(spec)
        }
    }
}

/// Pointwise kernel value `K(x, x')`; only the Gaussian form has one.
pub fn evaluate_kernel(spec: &KernelSpec, x: f64, x_prime: f64) -> Result<f64> {
    spec.validate()?;
    match *spec {
        KernelSpec::Gaussian { width } => {
            let u = x - x_prime;
            Ok((width * (2.0 * std::f64::consts::PI).sqrt()).recip()
                * (-u * u / (2.0 * width * width)).exp())
        }
        KernelSpec::Ideal => Err(Error::NoPointwiseForm),
    }
}

#[derive(Debug, Clone)]
enum KernelForm {
    /// Scaled identity: weight `1/dx` on the diagonal. Applying it
    /// reproduces the input exactly.
    Identity,
    /// Banded translation-invariant weights with per-row renormalization:
    /// `w[i][j] = row_scale[i] * stencil[j - i + half_bandwidth]`.
    Band {
        half_bandwidth: usize,
        stencil: Vec<f64>,
        row_scale: Vec<f64>,
    },
}

/// A kernel sampled onto a grid, with every row renormalized so that
/// `sum_j w[i][j] * dx = 1`.
#[derive(Debug, Clone)]
pub struct DiscretizedKernel {
    grid: Grid1D,
    form: KernelForm,
}

/// Row/column normalization defects of a discretized kernel,
/// `|sum * dx - 1|`. Column defects are reported over interior columns
/// only (at least one band away from each grid edge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    pub max_row_defect: f64,
    pub max_col_defect: f64,
}

/// Sample a kernel onto a grid and renormalize each row.
pub fn discretize(spec: &KernelSpec, grid: &Grid1D) -> Result<DiscretizedKernel> {
    spec.validate()?;
    match *spec {
        KernelSpec::Ideal => Ok(DiscretizedKernel {
            grid: *grid,
            form: KernelForm::Identity,
        }),
        KernelSpec::Gaussian { width } => {
            let dx = grid.dx();
            let min_width = MIN_WIDTH_STEPS * dx;
            if width < min_width {
                return Err(Error::UnderResolvedKernel { width, min_width });
            }
            let n = grid.n();
            let half_bandwidth = ((BAND_CUT_WIDTHS * width / dx).ceil() as usize).min(n - 1);
            let stencil: Vec<f64> = (0..=2 * half_bandwidth)
                .map(|d| {
                    let u = (d as f64 - half_bandwidth as f64) * dx;
                    (width * (2.0 * std::f64::consts::PI).sqrt()).recip()
                        * (-u * u / (2.0 * width * width)).exp()
                })
                .collect();
            let row_scale: Vec<f64> = (0..n)
                .map(|i| {
                    let lo = i.saturating_sub(half_bandwidth);
                    let hi = (i + half_bandwidth).min(n - 1);
                    let sum: f64 = (lo..=hi)
                        .map(|j| stencil[j + half_bandwidth - i])
                        .sum();
                    (dx * sum).recip()
                })
                .collect();
            Ok(DiscretizedKernel {
                grid: *grid,
                form: KernelForm::Band {
                    half_bandwidth,
                    stencil,
                    row_scale,
                },
            })
        }
    }
}

impl DiscretizedKernel {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Whether this kernel is the structural identity (ideal channel).
    pub fn is_identity(&self) -> bool {
        matches!(self.form, KernelForm::Identity)
    }

    /// Half-bandwidth of the stored band; zero for the identity.
    pub fn half_bandwidth(&self) -> usize {
        match &self.form {
            KernelForm::Identity => 0,
            KernelForm::Band { half_bandwidth, .. } => *half_bandwidth,
        }
    }

    /// Matrix entry `w[i][j]`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.n();
        assert!(i < n && j < n, "index out of range");
        match &self.form {
            KernelForm::Identity => {
                if i == j {
                    self.grid.dx().recip()
                } else {
                    0.0
                }
            }
            KernelForm::Band {
                half_bandwidth,
                stencil,
                row_scale,
            } => {
                let d = i.abs_diff(j);
                if d > *half_bandwidth {
                    0.0
                } else {
                    row_scale[i] * stencil[j + half_bandwidth - i]
                }
            }
        }
    }

    /// Apply the kernel to sampled data: `out[i] = sum_j w[i][j] f[j] dx`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        assert_eq!(f.len(), n, "sample count must match the grid");
        match &self.form {
            KernelForm::Identity => f.to_vec(),
            KernelForm::Band {
                half_bandwidth,
                stencil,
                row_scale,
            } => {
                let dx = self.grid.dx();
                (0..n)
                    .map(|i| {
                        let lo = i.saturating_sub(*half_bandwidth);
                        let hi = (i + half_bandwidth).min(n - 1);
                        let mut acc = 0.0;
                        for j in lo..=hi {
                            acc += stencil[j + half_bandwidth - i] * f[j];
                        }
                        acc * row_scale[i] * dx
                    })
                    .collect()
            }
        }
    }

    /// Band storage of a non-identity kernel:
    /// `(half_bandwidth, stencil, row_scale)`.
    pub(crate) fn band_parts(&self) -> Option<(usize, &[f64], &[f64])> {
        match &self.form {
            KernelForm::Identity => None,
            KernelForm::Band {
                half_bandwidth,
                stencil,
                row_scale,
            } => Some((*half_bandwidth, stencil, row_scale)),
        }
    }

    fn row_sum_dx(&self, i: usize) -> f64 {
        let n = self.grid.n();
        match &self.form {
            KernelForm::Identity => self.grid.dx().recip() * self.grid.dx(),
            KernelForm::Band {
                half_bandwidth,
                stencil,
                row_scale,
            } => {
                let lo = i.saturating_sub(*half_bandwidth);
                let hi = (i + half_bandwidth).min(n - 1);
                let sum: f64 = (lo..=hi).map(|j| stencil[j + half_bandwidth - i]).sum();
                row_scale[i] * sum * self.grid.dx()
            }
        }
    }

    fn col_sum_dx(&self, j: usize) -> f64 {
        let n = self.grid.n();
        match &self.form {
            KernelForm::Identity => self.grid.dx().recip() * self.grid.dx(),
            KernelForm::Band {
                half_bandwidth,
                stencil,
                row_scale,
            } => {
                let lo = j.saturating_sub(*half_bandwidth);
                let hi = (j + half_bandwidth).min(n - 1);
                let sum: f64 = (lo..=hi)
                    .map(|i| row_scale[i] * stencil[j + half_bandwidth - i])
                    .sum();
                sum * self.grid.dx()
            }
        }
    }
}

/// Measure the row and interior-column normalization defects.
pub fn verify_normalization(kernel: &DiscretizedKernel) -> NormalizationReport {
    let n = kernel.grid.n();
    let b = kernel.half_bandwidth();
    let max_row_defect = (0..n)
        .map(|i| (kernel.row_sum_dx(i) - 1.0).abs())
        .fold(0.0f64, f64::max);
    let interior = b..n.saturating_sub(b);
    let max_col_defect = interior
        .map(|j| (kernel.col_sum_dx(j) - 1.0).abs())
        .fold(0.0f64, f64::max);
    NormalizationReport {
        max_row_defect,
        max_col_defect,
    }
}
