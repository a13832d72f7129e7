//! Direct solvers for the coarsest level.
//!
//! Structured grids numbered row-major have bandwidth `O(sqrt(n))`, so small coarse grids use a
//! banded LU with partial pivoting. Storage follows the LAPACK `gbtrf` layout adapted to
//! row-major rows: row `i` holds columns `i - kl ..= i + kl + ku`, the extra `kl` columns
//! absorbing fill from row interchanges. Larger symmetric systems go to the nested-dissection
//! [`SparseLdlt`], whose fill grows like `n log n` instead of `n^1.5`.

use num_complex::Complex64;

use crate::error::{HelmError, Result};
pub use crate::ldlt::SparseLdlt;
use crate::sparse::{norm2, ComplexSparseMatrix};

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &ComplexSparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(HelmError::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut band = vec![Complex64::new(0.0, 0.0); n * width];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                band[i * width + (j as usize + kl - i)] = v;
            }
        }
        let scale = band.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let tiny = scale * f64::EPSILON * 1e-3;
        let at = |i: usize, j: usize| i * width + (j + kl - i);

        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = band[at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = band[at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if !(best > tiny) {
                return Err(HelmError::Singular { pivot: k });
            }
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    band.swap(at(k, j), at(p, j));
                }
            }
            let inv = 1.0 / band[at(k, k)];
            for i in k + 1..=last_row {
                let l = band[at(i, k)] * inv;
                band[at(i, k)] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = band[at(k, j)];
                    band[at(i, j)] -= l * u;
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            width,
            band,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.n {
            return Err(HelmError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let (n, kl, w) = (self.n, self.kl, self.width);
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                x[i] -= self.band[at(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + kl + self.ku).min(n - 1) {
                acc -= self.band[at(i, j)] * x[j];
            }
            x[i] = acc / self.band[at(i, i)];
        }
        Ok(x)
    }
}

/// Band entries above which [`DirectLu`] prefers the sparse factorization.
pub const BAND_LIMIT: usize = 1 << 22;

/// Banded LU for narrow bands or nonsymmetric matrices, sparse `L D L^T` otherwise.
#[derive(Debug, Clone)]
pub enum DirectLu {
    Banded(BandedLu),
    Sparse(SparseLdlt),
}

impl DirectLu {
    pub fn factor(a: &ComplexSparseMatrix) -> Result<Self> {
        let (kl, ku) = a.bandwidths();
        let band = a.nrows().saturating_mul(2 * kl + ku + 1);
        if band > BAND_LIMIT && a.symmetry_defect() <= 1e-13 * a.max_abs() {
            match SparseLdlt::factor(a) {
                Ok(f) => return Ok(Self::Sparse(f)),
                // Without pivoting a tiny pivot can appear; the banded LU pivots.
                Err(HelmError::Singular { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        BandedLu::factor(a).map(Self::Banded)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Banded(lu) => lu.dim(),
            Self::Sparse(lu) => lu.dim(),
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Self::Banded(lu) => lu.solve(rhs),
            Self::Sparse(lu) => lu.solve(rhs),
        }
    }
}

/// Solves `A x = rhs` with [`DirectLu`].
pub fn direct_solve(a: &ComplexSparseMatrix, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    DirectLu::factor(a)?.solve(rhs)
}

/// `||A x - b|| / ||b||`.
pub fn relative_residual(a: &ComplexSparseMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<Complex64> = ax.iter().zip(b).map(|(p, q)| q - p).collect();
    norm2(&r) / norm2(b)
}
