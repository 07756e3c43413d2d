//! Uniform 1D spatial grid with trapezoidal quadrature and the
//! finite-difference rules every field in the crate shares.

use crate::error::{Error, Result};

/// Minimum number of grid points.
pub const MIN_POINTS: usize = 16;

/// A uniform 1D discretization of an interval `[x_min, x_max]`.
///
/// Construction goes through [`make_grid`]; the spacing `dx` is derived
/// and all points are exactly `x_min + i * dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
}

/// Build a uniform grid over `[x_min, x_max]` with `n` points.
pub fn make_grid(x_min: f64, x_max: f64, n: usize) -> Result<Grid1D> {
    if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min || n < MIN_POINTS {
        return Err(Error::InvalidBounds { x_min, x_max, n });
    }
    let dx = (x_max - x_min) / (n - 1) as f64;
    Ok(Grid1D { x_min, x_max, n, dx })
}

impl Grid1D {
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of the `i`-th point.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// All point coordinates.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoidal quadrature of `f` over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n, "sample count must match the grid");
        let interior: f64 = f[1..self.n - 1].iter().sum();
        self.dx * (0.5 * f[0] + interior + 0.5 * f[self.n - 1])
    }

    /// Cumulative trapezoidal integral of `f`, zero at the left edge.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "sample count must match the grid");
        let mut acc = vec![0.0; self.n];
        for i in 1..self.n {
            acc[i] = acc[i - 1] + 0.5 * self.dx * (f[i - 1] + f[i]);
        }
        acc
    }

    /// First derivative of a smooth sampled function.
    ///
    /// Five-point central differences in the interior, falling back to
    /// three-point rules on the two points nearest each edge.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "sample count must match the grid");
        let n = self.n;
        let h = self.dx;
        let mut g = vec![0.0; n];
        g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        g[1] = (f[2] - f[0]) / (2.0 * h);
        for i in 2..n - 2 {
            g[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
        }
        g[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * h);
        g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        g
    }

    /// Second derivative of a smooth sampled function (five-point interior
    /// stencil, three-point near the edges).
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "sample count must match the grid");
        let n = self.n;
        let h2 = self.dx * self.dx;
        let mut g = vec![0.0; n];
        g[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        g[1] = (f[0] - 2.0 * f[1] + f[2]) / h2;
        for i in 2..n - 2 {
            g[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2])
                / (12.0 * h2);
        }
        g[n - 2] = (f[n - 3] - 2.0 * f[n - 2] + f[n - 1]) / h2;
        g[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
        g
    }

    /// Phase gradient: three-point central differences everywhere.
    ///
    /// This is the rule [`phase_from_gradient`](Self::phase_from_gradient)
    /// inverts, so reconstructing a phase from a gradient and differentiating
    /// again returns the input at every interior point.
    pub fn phase_gradient(&self, phi: &[f64]) -> Vec<f64> {
        assert_eq!(phi.len(), self.n, "sample count must match the grid");
        let n = self.n;
        let h = self.dx;
        let mut g = vec![0.0; n];
        g[0] = (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * h);
        for i in 1..n - 1 {
            g[i] = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
        }
        g[n - 1] = (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) / (2.0 * h);
        g
    }

    /// Cumulative midpoint integration of a gradient, anchored to zero at
    /// the left edge.
    ///
    /// Each step advances over `[x_{i-1}, x_{i+1}]` using the center sample,
    /// which makes this the exact discrete right-inverse of
    /// [`phase_gradient`](Self::phase_gradient) on interior points.
    pub fn phase_from_gradient(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n, "sample count must match the grid");
        let n = self.n;
        let h = self.dx;
        let mut phi = vec![0.0; n];
        phi[1] = 0.5 * h * (u[0] + u[1]);
        for i in 1..n - 1 {
            phi[i + 1] = phi[i - 1] + 2.0 * h * u[i];
        }
        phi
    }
}

#[cfg(test)]
mod tests {
    #![allow(clippy::needless_range_loop)]

    use super::*;

    #[test]
    fn make_grid_spacing() {
        let g = make_grid(-12.0, 12.0, 2048).unwrap();
        assert_eq!(g.dx(), 24.0 / 2047.0);
        assert_eq!(g.n(), 2048);
        assert_eq!(g.x(0), -12.0);

        let g = make_grid(0.0, 1.0, 16).unwrap();
        assert_eq!(g.n(), 16);
        assert_eq!(g.dx(), 1.0 / 15.0);
    }

    #[test]
    fn make_grid_rejects_degenerate_bounds() {
        assert!(matches!(
            make_grid(1.0, 1.0, 64),
            Err(Error::InvalidBounds { .. })
        ));
        assert!(matches!(
            make_grid(2.0, 1.0, 64),
            Err(Error::InvalidBounds { .. })
        ));
        assert!(matches!(
            make_grid(0.0, 1.0, 15),
            Err(Error::InvalidBounds { .. })
        ));
    }

    #[test]
    fn points_are_uniform_to_machine_precision() {
        let g = make_grid(-3.0, 7.0, 500).unwrap();
        for i in 1..g.n() {
            let step = g.x(i) - g.x(i - 1);
            // Rounding scale of x_min + i*dx, not of the coordinate itself.
            let tol = 8.0 * f64::EPSILON * (g.x_min().abs() + i as f64 * g.dx());
            assert!((step - g.dx()).abs() <= tol);
        }
        assert!((g.x(g.n() - 1) - g.x_max()).abs() < 1e-12);
    }

    #[test]
    fn integrate_linear_exactly() {
        let g = make_grid(0.0, 2.0, 101).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| 3.0 * x + 1.0).collect();
        // Trapezoid is exact on affine functions: integral = 3*2 + 2 = 8.
        assert!((g.integrate(&f) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_integral_matches_total() {
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| x * x).collect();
        let acc = g.cumulative_integral(&f);
        assert!((acc[g.n() - 1] - g.integrate(&f)).abs() < 1e-14);
        assert_eq!(acc[0], 0.0);
    }

    #[test]
    fn derivative_of_gaussian_modulus_matches_analytic() {
        // A synthesized packet modulus at the default resolution must be
        // differentiated to 1e-6 relative accuracy over |x| <= 5 sigma.
        let g = make_grid(-10.0, 10.0, 4096).unwrap();
        let sigma = 1.0f64;
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let f: Vec<f64> = g
            .positions()
            .iter()
            .map(|x| norm * (-x * x / (4.0 * sigma * sigma)).exp())
            .collect();
        let num = g.derivative(&f);
        let exact: Vec<f64> = g
            .positions()
            .iter()
            .zip(&f)
            .map(|(x, v)| -x / (2.0 * sigma * sigma) * v)
            .collect();
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..g.n() {
            if g.x(i).abs() <= 5.0 * sigma {
                let tol = 1e-6 * exact[i].abs().max(1e-3 * scale);
                assert!(
                    (num[i] - exact[i]).abs() <= tol,
                    "derivative defect {} at x = {}",
                    (num[i] - exact[i]).abs(),
                    g.x(i)
                );
            }
        }
    }

    #[test]
    fn second_derivative_of_sine() {
        let g = make_grid(0.0, std::f64::consts::TAU, 2048).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| x.sin()).collect();
        let num = g.second_derivative(&f);
        for i in 4..g.n() - 4 {
            assert!((num[i] + g.x(i).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_gradient_inverts_phase_from_gradient() {
        let g = make_grid(-5.0, 5.0, 512).unwrap();
        // A deliberately rough gradient: the inverse pairing must hold for
        // arbitrary sample data, not just smooth ones.
        let u: Vec<f64> = (0..g.n())
            .map(|i| ((i * 2654435761usize) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let phi = g.phase_from_gradient(&u);
        let back = g.phase_gradient(&phi);
        assert_eq!(back[0], u[0]);
        for i in 1..g.n() - 1 {
            assert!(
                (back[i] - u[i]).abs() <= 1e-12 * u[i].abs().max(1.0),
                "round-trip defect {} at i = {}",
                (back[i] - u[i]).abs(),
                i
            );
        }
    }

    #[test]
    fn phase_from_constant_gradient_is_linear() {
        let g = make_grid(-5.0, 5.0, 256).unwrap();
        let u = vec![2.0; g.n()];
        let phi = g.phase_from_gradient(&u);
        for i in 0..g.n() {
            let expected = 2.0 * (g.x(i) - g.x_min());
            assert!((phi[i] - expected).abs() < 1e-12);
        }
    }
}
