//! One-step amplification of plane waves by a smoother on the 1D Dirichlet problem.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assembly::assemble_dirichlet_1d;
use crate::error::{HelmError, Result};
use crate::krylov::gmres_relax;
use crate::smoothers::{gauss_seidel_sweep, jacobi_sweep, SweepDirection};
use crate::sparse::norm2;

/// Length of the interval the experiment runs on.
pub const INTERVAL_LENGTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplificationSmoother {
    Jacobi { omega: f64 },
    GaussSeidel,
    Gmres { m: usize },
}

impl AmplificationSmoother {
    pub fn name(&self) -> String {
        match self {
            Self::Jacobi { .. } => "jacobi".into(),
            Self::GaussSeidel => "gauss-seidel".into(),
            Self::Gmres { m } => format!("gmres({m})"),
        }
    }
}

/// `theta_k = -pi + 2 pi (k + 1) / n` for `k = 0..n`, i.e. `n` points of `(-pi, pi]`.
pub fn amplification_thetas(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * (k + 1) as f64 / n as f64).collect()
}

/// For each `theta`, starts from `u0 = e^{i theta x / h}` at the interior nodes `x_k = k h` of
/// `(0, 10)`, applies one smoothing step towards the zero solution of `A u = 0` and returns
/// `(theta, ||u1|| / ||u0||)`.
pub fn amplification_experiment(kappa: f64, h: f64, sigma: Complex64, smoother: AmplificationSmoother, thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(h > 0.0) || !(kappa > 0.0) {
        return Err(HelmError::InvalidArgument("kappa and h must be positive".into()));
    }
    let cells = (INTERVAL_LENGTH / h).round() as usize;
    let a = assemble_dirichlet_1d(cells, INTERVAL_LENGTH, kappa * h, sigma)?;
    let n = a.nrows();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    thetas
        .iter()
        .map(|&theta| {
            let u0: Vec<Complex64> = (1..=n).map(|k| Complex64::from_polar(1.0, theta * k as f64)).collect();
            let u1 = match smoother {
                AmplificationSmoother::Jacobi { omega } => {
                    let mut u = u0.clone();
                    jacobi_sweep(&a, &mut u, &zero, omega, 1)?;
                    u
                }
                AmplificationSmoother::GaussSeidel => {
                    let mut u = u0.clone();
                    gauss_seidel_sweep(&a, &mut u, &zero, 1, SweepDirection::Forward)?;
                    u
                }
                AmplificationSmoother::Gmres { m } => {
                    let rhs: Vec<Complex64> = a.matvec(&u0).into_iter().map(|v| -v).collect();
                    let e = gmres_relax(&a, &rhs, m);
                    u0.iter().zip(&e).map(|(p, q)| p + q).collect()
                }
            };
            Ok((theta, norm2(&u1) / norm2(&u0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfa::symbols::symbol_smoother_jacobi;

    #[test]
    fn theta_grid() {
        let t = amplification_thetas(4);
        assert_eq!(t, vec![-PI / 2.0, 0.0, PI / 2.0, PI]);
    }

    #[test]
    fn exact_gmres_annihilates() {
        // Small problem so that m = N is cheap.
        let (kappa, h) = (2.0, 0.25);
        let n = (INTERVAL_LENGTH / h).round() as usize - 1;
        let r = amplification_experiment(kappa, h, Complex64::new(-0.08, 0.01), AmplificationSmoother::Gmres { m: n }, &[0.3, 2.0]).unwrap();
        for (_, rho) in r {
            assert!(rho < 1e-8);
        }
    }

    #[test]
    fn jacobi_matches_the_periodic_symbol_at_pi() {
        let (kappa, h) = (200.0, 0.004);
        let sigma = Complex64::new(-0.085, 0.0);
        let r = amplification_experiment(kappa, h, sigma, AmplificationSmoother::Jacobi { omega: 0.6 }, &[PI]).unwrap();
        let sym = symbol_smoother_jacobi(PI, kappa * h, sigma, 0.6).unwrap().norm();
        assert!((r[0].1 - sym).abs() < 5e-2);
    }
}
