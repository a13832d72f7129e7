//! Spectral-radius sweeps over the low frequencies and pointwise smoother curves.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::blocks::{LfaSmoother, SymbolBlock, SymbolParams};
use super::symbols::Stencil;
use crate::error::{HelmError, Result};

/// Perturbation applied to a sample that hits a resonance exactly.
pub const RESONANCE_NUDGE: f64 = 1e-9;

/// `num` equispaced points on `[-pi/2, pi/2]`, both ends included.
pub fn theta_samples(num: usize) -> Vec<f64> {
    linspace(-PI / 2.0, PI / 2.0, num)
}

fn linspace(a: f64, b: f64, num: usize) -> Vec<f64> {
    if num == 1 {
        return vec![a];
    }
    (0..num).map(|k| a + (b - a) * k as f64 / (num - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub theta0: f64,
    /// `f64::INFINITY` at an unresolvable resonance.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Largest sampled spectral radius.
    pub sup: f64,
}

impl SweepResult {
    pub fn resonances(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.rho.is_infinite()).map(|p| p.theta0).collect()
    }
}

/// Spectral radius of `builder(theta0, params)` at `num_samples` frequencies. A sample hitting
/// a resonance is retried at `theta0 + 1e-9` and recorded with infinite radius if that fails too.
pub fn spectral_radius_sweep<F>(builder: F, params: &SymbolParams, num_samples: usize) -> Result<SweepResult>
where
    F: Fn(f64, &SymbolParams) -> Result<SymbolBlock>,
{
    if num_samples < 2 {
        return Err(HelmError::InvalidArgument("a sweep needs at least 2 samples".into()));
    }
    let mut points = Vec::with_capacity(num_samples);
    for theta0 in theta_samples(num_samples) {
        let rho = match builder(theta0, params) {
            Ok(b) => b.spectral_radius()?,
            Err(HelmError::Resonance { .. }) => match builder(theta0 + RESONANCE_NUDGE, params) {
                Ok(b) => b.spectral_radius()?,
                Err(HelmError::Resonance { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        points.push(SweepPoint { theta0, rho });
    }
    let sup = points.iter().fold(0.0f64, |m, p| m.max(p.rho));
    Ok(SweepResult { points, sup })
}

/// `|S(theta)|` of one relaxation on `num` equispaced points of `(-pi, pi]`.
pub fn smoother_curve(stencil: &Stencil, smoother: LfaSmoother, omega: f64, num: usize) -> Result<Vec<(f64, f64)>> {
    (1..=num)
        .map(|k| {
            let theta = -PI + 2.0 * PI * k as f64 / num as f64;
            let v: Complex64 = match smoother {
                LfaSmoother::Jacobi => stencil.jacobi(theta, omega)?,
                LfaSmoother::GaussSeidel => stencil.gauss_seidel(theta)?,
            };
            Ok((theta, v.norm()))
        })
        .collect()
}
