//! Relaxation methods and the per-level smoother choice.
//!
//! A level is relaxed classically (weighted Jacobi or lexicographic Gauss-Seidel) when
//! `kappa h_l / p < alpha` and by a few GMRES steps otherwise; level 0 is always solved directly.
//! `h_l` is the element diameter, so a 2D grid with `n` cells per side has `h_l = sqrt(2) / n`.

use num_complex::Complex64;

use crate::error::{HelmError, Result};
use crate::mesh::GridHierarchy;
use crate::sparse::ComplexSparseMatrix;

pub use crate::krylov::gmres_relax;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Forward,
    Backward,
}

/// Relaxation used on a classically smoothed level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalSmoother {
    Jacobi { omega: f64 },
    GaussSeidel,
}

/// What happens on one level of the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSmoother {
    Direct,
    Jacobi { omega: f64 },
    GaussSeidel,
    GmresRelax { m: usize },
}

impl LevelSmoother {
    pub fn is_linear(&self) -> bool {
        !matches!(self, LevelSmoother::GmresRelax { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LevelSmoother::Direct => "direct",
            LevelSmoother::Jacobi { .. } => "jacobi",
            LevelSmoother::GaussSeidel => "gauss-seidel",
            LevelSmoother::GmresRelax { .. } => "gmres",
        }
    }
}

/// Per-level smoother assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherPlan {
    pub levels: Vec<LevelSmoother>,
    pub alpha: f64,
    pub omega: f64,
    /// Classically smoothed levels (`S_L`).
    pub classical: Vec<usize>,
    /// GMRES-smoothed levels (`G_L`).
    pub gmres: Vec<usize>,
}

impl SmootherPlan {
    pub fn new(hierarchy: &GridHierarchy, kappa: f64, p: usize, alpha: f64, classical: ClassicalSmoother, gmres_steps: usize) -> Result<Self> {
        let (s, g) = classify_levels(hierarchy, kappa, p, alpha)?;
        let mut levels = vec![LevelSmoother::Direct; hierarchy.levels.len()];
        for &l in &s {
            levels[l] = match classical {
                ClassicalSmoother::Jacobi { omega } => LevelSmoother::Jacobi { omega },
                ClassicalSmoother::GaussSeidel => LevelSmoother::GaussSeidel,
            };
        }
        for &l in &g {
            levels[l] = LevelSmoother::GmresRelax { m: gmres_steps };
        }
        let omega = match classical {
            ClassicalSmoother::Jacobi { omega } => omega,
            ClassicalSmoother::GaussSeidel => 0.0,
        };
        Ok(Self {
            levels,
            alpha,
            omega,
            classical: s,
            gmres: g,
        })
    }
}

/// Splits levels `1..=L` into classically smoothed (`kappa h_l / p < alpha`) and GMRES-smoothed.
pub fn classify_levels(hierarchy: &GridHierarchy, kappa: f64, p: usize, alpha: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(alpha > 0.0) {
        return Err(HelmError::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if p == 0 {
        return Err(HelmError::UnsupportedOrder(p));
    }
    let mut s = Vec::new();
    let mut g = Vec::new();
    for (l, grid) in hierarchy.levels.iter().enumerate().skip(1) {
        if is_classical(kappa, grid.diameter(), p, alpha) {
            s.push(l);
        } else {
            g.push(l);
        }
    }
    Ok((s, g))
}

pub fn is_classical(kappa: f64, h: f64, p: usize, alpha: f64) -> bool {
    kappa * h / (p as f64) < alpha
}

fn inverse_diagonal(a: &ComplexSparseMatrix) -> Result<Vec<Complex64>> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d == Complex64::new(0.0, 0.0) {
                Err(HelmError::ZeroDiagonal { row })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// `x <- x + omega D^{-1} (rhs - A x)`, `steps` times.
pub fn jacobi_sweep(a: &ComplexSparseMatrix, x: &mut [Complex64], rhs: &[Complex64], omega: f64, steps: usize) -> Result<()> {
    let inv = inverse_diagonal(a)?;
    jacobi_with(a, &inv, x, rhs, omega, steps);
    Ok(())
}

pub(crate) fn jacobi_with(a: &ComplexSparseMatrix, inv_diag: &[Complex64], x: &mut [Complex64], rhs: &[Complex64], omega: f64, steps: usize) {
    let mut ax = vec![Complex64::new(0.0, 0.0); x.len()];
    for _ in 0..steps {
        a.matvec_into(x, &mut ax);
        for i in 0..x.len() {
            x[i] += omega * inv_diag[i] * (rhs[i] - ax[i]);
        }
    }
}

/// Lexicographic Gauss-Seidel in increasing (forward) or decreasing (backward) index order.
pub fn gauss_seidel_sweep(a: &ComplexSparseMatrix, x: &mut [Complex64], rhs: &[Complex64], steps: usize, direction: SweepDirection) -> Result<()> {
    let inv = inverse_diagonal(a)?;
    gauss_seidel_with(a, &inv, x, rhs, steps, direction);
    Ok(())
}

pub(crate) fn gauss_seidel_with(a: &ComplexSparseMatrix, inv_diag: &[Complex64], x: &mut [Complex64], rhs: &[Complex64], steps: usize, direction: SweepDirection) {
    let n = x.len();
    let update = |x: &mut [Complex64], i: usize| {
        let (cols, vals) = a.row(i);
        let mut acc = rhs[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c as usize != i {
                acc -= v * x[c as usize];
            }
        }
        x[i] = acc * inv_diag[i];
    };
    for _ in 0..steps {
        match direction {
            SweepDirection::Forward => (0..n).for_each(|i| update(x, i)),
            SweepDirection::Backward => (0..n).rev().for_each(|i| update(x, i)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_matrix, Flavor, HelmholtzProblem};
    use crate::mesh::{build_hierarchy, build_hierarchy_with, MeshSpec};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn test_matrix() -> ComplexSparseMatrix {
        let g = build_hierarchy(2, 4, 1).unwrap().levels.remove(0);
        assemble_matrix(&g, &HelmholtzProblem::new(3.0, c(-0.07, 0.01)), 1, Flavor::Cip).unwrap()
    }

    #[test]
    fn classification_examples() {
        let h = build_hierarchy(2, 32, 3).unwrap();
        // Diameters sqrt(2)/64, sqrt(2)/128: kappa h = 2.2, 1.1 -> all GMRES for kappa = 100.
        let (s, g) = classify_levels(&h, 100.0, 1, 0.5).unwrap();
        assert!(s.is_empty());
        assert_eq!(g, vec![1, 2]);
        let h = build_hierarchy(2, 32, 5).unwrap();
        // Level 3 (256 cells): 0.55 >= 0.5; level 4 (512 cells): 0.28 < 0.5.
        let (s, g) = classify_levels(&h, 100.0, 1, 0.5).unwrap();
        assert_eq!(s, vec![4]);
        assert_eq!(g, vec![1, 2, 3]);
        // 1D grids have diameter h: kappa = 100, h = 1/128 gives 0.78.
        let h = build_hierarchy(1, 64, 2).unwrap();
        assert_eq!(classify_levels(&h, 100.0, 1, 0.5).unwrap().1, vec![1]);
        assert!(is_classical(0.25, 1.0, 1, 0.5));
        assert!(!is_classical(0.5, 1.0, 1, 0.5));
        assert!(classify_levels(&h, 100.0, 1, 0.0).is_err());
    }

    #[test]
    fn fixed_points() {
        let a = test_matrix();
        let mut rng = StdRng::seed_from_u64(2);
        let x = random_vec(&mut rng, a.nrows());
        let b = a.matvec(&x);
        let mut y = x.clone();
        jacobi_sweep(&a, &mut y, &b, 0.6, 3).unwrap();
        let err = y.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        for dir in [SweepDirection::Forward, SweepDirection::Backward] {
            let mut y = x.clone();
            gauss_seidel_sweep(&a, &mut y, &b, 2, dir).unwrap();
            let err = y.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn backward_sweep_is_the_transpose_of_forward() {
        // One sweep from zero is x = R rhs; check w^T (R_f v) = (R_b w)^T v.
        let a = test_matrix();
        let n = a.nrows();
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..5 {
            let v = random_vec(&mut rng, n);
            let w = random_vec(&mut rng, n);
            let mut rv = vec![c(0.0, 0.0); n];
            gauss_seidel_sweep(&a, &mut rv, &v, 1, SweepDirection::Forward).unwrap();
            let mut rw = vec![c(0.0, 0.0); n];
            gauss_seidel_sweep(&a, &mut rw, &w, 1, SweepDirection::Backward).unwrap();
            let lhs: Complex64 = w.iter().zip(&rv).map(|(p, q)| p * q).sum();
            let rhs: Complex64 = rw.iter().zip(&v).map(|(p, q)| p * q).sum();
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn zero_diagonal_names_the_row() {
        let a = crate::sparse::CsrMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]).unwrap();
        let mut x = vec![c(0.0, 0.0); 2];
        let err = jacobi_sweep(&a, &mut x, &[c(1.0, 0.0); 2], 0.5, 1).unwrap_err();
        assert!(matches!(err, HelmError::ZeroDiagonal { row: 1 }));
    }

    #[test]
    fn jacobi_damps_periodic_modes_by_the_symbol() {
        let n = 64;
        let g = build_hierarchy_with(&MeshSpec::interval(0.0, 1.0, n, 1).periodic()).unwrap().levels.remove(0);
        let (t, sigma, omega) = (0.7, c(-0.05, 0.02), 0.6);
        let a = assemble_matrix(&g, &HelmholtzProblem::new(t / g.h, sigma), 1, Flavor::Cip).unwrap();
        for k in [0usize, 5, 16, 31, 32] {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let mut x: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, theta * j as f64)).collect();
            let x0 = x.clone();
            jacobi_sweep(&a, &mut x, &vec![c(0.0, 0.0); n], omega, 1).unwrap();
            let sym = crate::lfa::symbol_smoother_jacobi(theta, t, sigma, omega).unwrap();
            for j in 0..n {
                assert!((x[j] - sym * x0[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gmres_relax_residuals_do_not_increase() {
        let a = test_matrix();
        let mut rng = StdRng::seed_from_u64(6);
        let b = random_vec(&mut rng, a.nrows());
        let mut last = f64::INFINITY;
        for m in 1..12 {
            let w = gmres_relax(&a, &b, m);
            let r: Vec<Complex64> = a.matvec(&w).iter().zip(&b).map(|(p, q)| q - p).collect();
            let nr = crate::sparse::norm2(&r);
            assert!(nr <= last * (1.0 + 1e-12));
            last = nr;
        }
    }
}
