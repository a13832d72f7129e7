//! GMRES and flexible GMRES without restarts.
//!
//! Both share one Arnoldi loop (modified Gram-Schmidt, complex Givens rotations). The flexible
//! variant stores every preconditioned direction, so the preconditioner may change from one
//! application to the next. Its low-memory form drops those directions and recomputes them from
//! the Arnoldi vectors at the end, which gives the same iterates when the preconditioner is
//! deterministic.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::Result;
use crate::sparse::{norm2, ComplexSparseMatrix};

/// `y = A x` for a square complex operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

impl LinearOperator for ComplexSparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matvec(x)
    }
}

/// A (possibly nonlinear) map from residuals to corrections.
pub trait Preconditioner {
    fn apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(r.to_vec())
    }
}

impl<F> Preconditioner for F
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    fn apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        self(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||r_k|| / ||r_0||` for `k = 0, 1, ...`; the first entry is 1.
    pub relative_residual_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveReport {
    pub fn final_relative_residual(&self) -> f64 {
        *self.relative_residual_history.last().unwrap_or(&0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

enum Mode<'a> {
    Plain,
    Right(&'a dyn Preconditioner),
    Flexible(&'a dyn Preconditioner),
    FlexibleRecompute(&'a dyn Preconditioner),
}

/// Rotation `[c s; -conj(s) c]` zeroing `b` below `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let phase = a / a.norm();
    (a.norm() / r, phase * b.conj() / r)
}

fn arnoldi_solve(a: &dyn LinearOperator, rhs: &[Complex64], x0: Option<&[Complex64]>, opts: KrylovOptions, mode: Mode) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = Instant::now();
    let n = a.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![zero; n]);
    let r0: Vec<Complex64> = if x0.is_some() {
        a.apply(&x).iter().zip(rhs).map(|(ax, b)| b - ax).collect()
    } else {
        rhs.to_vec()
    };
    let beta = norm2(&r0);
    if beta == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual_history: vec![0.0],
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }

    let max_steps = opts.max_iter.min(n.max(1));
    let mut v: Vec<Vec<Complex64>> = vec![r0.iter().map(|z| z / beta).collect()];
    let mut z: Vec<Vec<Complex64>> = Vec::new();
    let mut h: Vec<Vec<Complex64>> = Vec::new(); // column j has j + 2 entries
    let mut cs: Vec<(f64, Complex64)> = Vec::new();
    let mut g = vec![Complex64::new(beta, 0.0)];
    let mut history = vec![1.0];
    let mut converged = false;

    for j in 0..max_steps {
        let dir = match mode {
            Mode::Plain | Mode::Right(_) => None,
            Mode::Flexible(m) | Mode::FlexibleRecompute(m) => Some(m.apply(&v[j])?),
        };
        let mut w = match (&mode, &dir) {
            (Mode::Flexible(_) | Mode::FlexibleRecompute(_), Some(d)) => a.apply(d),
            (Mode::Right(m), _) => a.apply(&m.apply(&v[j])?),
            _ => a.apply(&v[j]),
        };
        if let (Mode::Flexible(_), Some(d)) = (&mode, dir) {
            z.push(d);
        }
        let wnorm0 = norm2(&w);
        let mut col = vec![zero; j + 2];
        for (i, vi) in v.iter().enumerate() {
            let hij: Complex64 = vi.iter().zip(&w).map(|(p, q)| p.conj() * q).sum();
            col[i] = hij;
            for (wk, vk) in w.iter_mut().zip(vi) {
                *wk -= hij * vk;
            }
        }
        let hnext = norm2(&w);
        col[j + 1] = Complex64::new(hnext, 0.0);
        for (i, &(c, s)) in cs.iter().enumerate() {
            let (p, q) = (col[i], col[i + 1]);
            col[i] = c * p + s * q;
            col[i + 1] = -s.conj() * p + c * q;
        }
        let (c, s) = givens(col[j], col[j + 1]);
        col[j] = c * col[j] + s * col[j + 1];
        col[j + 1] = zero;
        cs.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        h.push(col);

        let rel = g[j + 1].norm() / beta;
        history.push(rel);
        let breakdown = hnext <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE);
        if rel <= opts.tol || breakdown {
            converged = rel <= opts.tol;
            break;
        }
        v.push(w.iter().map(|q| q / hnext).collect());
    }

    // Back substitution for the least-squares coefficients.
    let k = h.len();
    let mut y = vec![zero; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (jj, yj) in y.iter().enumerate().skip(i + 1) {
            acc -= h[jj][i] * yj;
        }
        y[i] = acc / h[i][i];
    }
    match mode {
        Mode::Flexible(_) => {
            for (yj, zj) in y.iter().zip(&z) {
                for (xi, zi) in x.iter_mut().zip(zj) {
                    *xi += yj * zi;
                }
            }
        }
        Mode::FlexibleRecompute(m) => {
            for (yj, vj) in y.iter().zip(&v) {
                for (xi, di) in x.iter_mut().zip(m.apply(vj)?) {
                    *xi += yj * di;
                }
            }
        }
        Mode::Right(m) => {
            let mut u = vec![zero; n];
            for (yj, vj) in y.iter().zip(&v) {
                for (ui, vi) in u.iter_mut().zip(vj) {
                    *ui += yj * vi;
                }
            }
            for (xi, di) in x.iter_mut().zip(m.apply(&u)?) {
                *xi += di;
            }
        }
        Mode::Plain => {
            for (yj, vj) in y.iter().zip(&v) {
                for (xi, vi) in x.iter_mut().zip(vj) {
                    *xi += yj * vi;
                }
            }
        }
    }

    Ok((
        x,
        SolveReport {
            iterations: k,
            relative_residual_history: history,
            converged,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Un-restarted GMRES with at most `m` steps, stopping early at relative residual `tol`.
pub fn gmres(a: &dyn LinearOperator, rhs: &[Complex64], m: usize, tol: f64) -> (Vec<Complex64>, SolveReport) {
    gmres_from(a, rhs, None, m, tol)
}

pub fn gmres_from(a: &dyn LinearOperator, rhs: &[Complex64], x0: Option<&[Complex64]>, m: usize, tol: f64) -> (Vec<Complex64>, SolveReport) {
    arnoldi_solve(a, rhs, x0, KrylovOptions { tol, max_iter: m }, Mode::Plain).expect("plain GMRES has no fallible steps")
}

/// Exactly `m` GMRES steps on `A w = rhs` from a zero initial guess (fewer on breakdown).
pub fn gmres_relax(a: &dyn LinearOperator, rhs: &[Complex64], m: usize) -> Vec<Complex64> {
    gmres(a, rhs, m.max(1), 0.0).0
}

/// Right-preconditioned GMRES, `A M y = b`, `x = x0 + M y`; requires a linear preconditioner.
pub fn right_preconditioned_gmres(a: &dyn LinearOperator, rhs: &[Complex64], precond: &dyn Preconditioner, x0: Option<&[Complex64]>, opts: KrylovOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    arnoldi_solve(a, rhs, x0, opts, Mode::Right(precond))
}

/// Flexible GMRES with a (possibly nonlinear) right preconditioner.
pub fn fgmres(a: &dyn LinearOperator, rhs: &[Complex64], precond: &dyn Preconditioner, x0: Option<&[Complex64]>, opts: KrylovOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    arnoldi_solve(a, rhs, x0, opts, Mode::Flexible(precond))
}

/// [`fgmres`] storing only the Arnoldi basis: the preconditioner is applied once more per step
/// when the solution is formed. Same result for a deterministic preconditioner, half the memory.
pub fn fgmres_low_memory(a: &dyn LinearOperator, rhs: &[Complex64], precond: &dyn Preconditioner, x0: Option<&[Complex64]>, opts: KrylovOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    arnoldi_solve(a, rhs, x0, opts, Mode::FlexibleRecompute(precond))
}
