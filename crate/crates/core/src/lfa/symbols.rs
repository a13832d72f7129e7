//! Fourier symbols of the 1D stencils and of Jacobi / Gauss-Seidel relaxation.
//!
//! All operator symbols are dimensionless: the stencil `(1/h)[sigma, R, 2S, R, sigma]` has
//! symbol `a(theta) / h` and this module returns `a(theta)`. Products that mix levels carry
//! the mesh-size ratio explicitly (see the block builders).

use num_complex::Complex64;

use crate::assembly::StencilCoefficients;
use crate::error::{HelmError, Result};

/// One 1D five-point stencil `[sigma, R, 2S, R, sigma]`, up to the `1/h` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub sigma: Complex64,
    pub r: Complex64,
    pub s: Complex64,
}

impl Stencil {
    pub fn cip(t: f64, sigma: Complex64) -> Self {
        let c = StencilCoefficients::new(t, sigma);
        Self {
            sigma: c.sigma,
            r: c.r,
            s: c.s,
        }
    }

    pub fn fem(t: f64) -> Self {
        Self::cip(t, Complex64::new(0.0, 0.0))
    }

    pub fn shifted(t: f64, beta: f64) -> Self {
        let c = StencilCoefficients::shifted(t, beta);
        Self {
            sigma: c.sigma,
            r: c.r,
            s: c.s,
        }
    }

    /// `2 sigma cos 2theta + 2 R cos theta + 2 S`.
    pub fn symbol(&self, theta: f64) -> Complex64 {
        2.0 * self.sigma * (2.0 * theta).cos() + 2.0 * self.r * theta.cos() + 2.0 * self.s
    }

    /// Weighted Jacobi: `1 - omega a(theta) / (2 S)`.
    pub fn jacobi(&self, theta: f64, omega: f64) -> Result<Complex64> {
        if self.s == Complex64::new(0.0, 0.0) {
            return Err(HelmError::ZeroDiagonal { row: 0 });
        }
        Ok(1.0 - omega * self.symbol(theta) / (2.0 * self.s))
    }

    /// Forward lexicographic Gauss-Seidel: `-(R e^{i theta} + sigma e^{2i theta}) / (R e^{-i theta} + sigma e^{-2i theta} + 2S)`.
    pub fn gauss_seidel(&self, theta: f64) -> Result<Complex64> {
        let e1 = Complex64::from_polar(1.0, theta);
        let e2 = Complex64::from_polar(1.0, 2.0 * theta);
        let den = self.r * e1.conj() + self.sigma * e2.conj() + 2.0 * self.s;
        if den.norm() <= f64::EPSILON * (self.r.norm() + self.sigma.norm() + self.s.norm()) {
            return Err(HelmError::Resonance {
                what: "gauss-seidel",
                level: 0,
                theta,
            });
        }
        Ok(-(self.r * e1 + self.sigma * e2) / den)
    }
}

pub fn symbol_a_cip(theta: f64, t: f64, sigma: Complex64) -> Complex64 {
    Stencil::cip(t, sigma).symbol(theta)
}

pub fn symbol_a_fem(theta: f64, t: f64) -> Complex64 {
    Stencil::fem(t).symbol(theta)
}

pub fn symbol_a_shifted(theta: f64, t: f64, beta: f64) -> Complex64 {
    Stencil::shifted(t, beta).symbol(theta)
}

/// `1 - (omega / S)(sigma cos 2theta + R cos theta + S)`.
pub fn symbol_smoother_jacobi(theta: f64, t: f64, sigma: Complex64, omega: f64) -> Result<Complex64> {
    Stencil::cip(t, sigma).jacobi(theta, omega)
}

pub fn symbol_smoother_gs(theta: f64, t: f64, sigma: Complex64) -> Result<Complex64> {
    Stencil::cip(t, sigma).gauss_seidel(theta)
}

/// Linear interpolation / full weighting symbol `(1 + cos theta) / 2`.
pub fn symbol_transfer(theta: f64) -> f64 {
    (1.0 + theta.cos()) / 2.0
}

/// Penalty `(6 cos t - 6 + t^2 cos t + 2 t^2) / (12 (1 - cos t)^2)` that removes the leading
/// phase error of the 1D scheme. Real-valued, returned in the complex penalty slot.
pub fn optimal_sigma(t: f64) -> Result<Complex64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(HelmError::InvalidArgument(format!("optimal penalty needs t > 0, got {t}")));
    }
    let value = if t < 0.1 {
        // The closed form cancels catastrophically for small t.
        let t2 = t * t;
        -1.0 / 12.0 + t2 * (-1.0 / 360.0 + t2 * (1.0 / 6048.0 + t2 * (1.0 / 43200.0 + t2 * (5.0 / 3193344.0 + t2 * 691.0 / 8491392000.0))))
    } else {
        let (c, t2) = (t.cos(), t * t);
        let one_minus = 2.0 * (t / 2.0).sin().powi(2);
        (6.0 * c - 6.0 + t2 * c + 2.0 * t2) / (12.0 * one_minus * one_minus)
    };
    Ok(Complex64::new(value, 0.0))
}

/// Penalty rule used for the figures: `sigma_o(t) + 0.01i` for `t < 1`, `sigma_o(t) + 0.05i` otherwise.
pub fn auto_sigma(t: f64) -> Result<Complex64> {
    let shift = if t < 1.0 { 0.01 } else { 0.05 };
    Ok(optimal_sigma(t)? + Complex64::new(0.0, shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operator_symbol_limits() {
        for t in [0.1, 0.8, 2.0] {
            assert_relative_eq!(symbol_a_cip(0.0, t, c(0.0, 0.0)).re, -t * t, epsilon = 1e-14);
        }
        assert_relative_eq!(symbol_a_cip(PI, 0.0, c(0.0, 0.0)).re, 4.0, epsilon = 1e-14);
        assert_eq!(symbol_a_shifted(0.3, 0.7, 0.0), symbol_a_fem(0.3, 0.7));
    }

    #[test]
    fn jacobi_closed_forms() {
        let (t, omega) = (0.9f64, 0.6);
        let t2 = t * t;
        let at_pi = symbol_smoother_jacobi(PI, t, c(0.0, 0.0), omega).unwrap();
        let at_0 = symbol_smoother_jacobi(0.0, t, c(0.0, 0.0), omega).unwrap();
        assert_relative_eq!(at_pi.re, 1.0 - omega * (12.0 - t2) / (6.0 - 2.0 * t2), epsilon = 1e-14);
        assert_relative_eq!(at_0.re, 1.0 + 3.0 * omega * t2 / (6.0 - 2.0 * t2), epsilon = 1e-14);
        assert_eq!(symbol_smoother_jacobi(1.3, t, c(-0.1, 0.2), 0.0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn gauss_seidel_laplacian_value() {
        let v = symbol_smoother_gs(PI / 2.0, 0.0, c(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.norm(), 1.0 / 5f64.sqrt(), epsilon = 1e-14);
        let lo = symbol_smoother_gs(PI, 0.5, c(0.0, 0.0)).unwrap().norm();
        let hi = symbol_smoother_gs(PI, 1.0, c(0.0, 0.0)).unwrap().norm();
        assert!(lo < hi);
    }

    #[test]
    fn transfer_values() {
        assert_eq!(symbol_transfer(0.0), 1.0);
        assert!(symbol_transfer(PI).abs() < 1e-16);
        assert_relative_eq!(symbol_transfer(PI / 2.0), 0.5, epsilon = 1e-16);
    }

    #[test]
    fn optimal_penalty() {
        assert!((optimal_sigma(0.8).unwrap().re + 0.085).abs() < 1e-3);
        assert_relative_eq!(optimal_sigma(1e-4).unwrap().re, -1.0 / 12.0, epsilon = 1e-9);
        // The series and the closed form agree where both are accurate.
        let series = optimal_sigma(0.0999999).unwrap().re;
        let closed = optimal_sigma(0.1000001).unwrap().re;
        assert!((series - closed).abs() < 1e-9);
        assert!(optimal_sigma(0.0).is_err());
        assert_eq!(auto_sigma(0.8).unwrap().im, 0.01);
        assert_eq!(auto_sigma(1.6).unwrap().im, 0.05);
    }
}
