//! Compressed sparse row storage for the complex operators and real transfer maps.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::error::{HelmError, Result};

/// Scalar types that can live in a [`CsrMatrix`].
pub trait Scalar:
    Copy
    + Default
    + PartialEq
    + Send
    + Sync
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
{
    fn zero() -> Self {
        Self::default()
    }
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Row-compressed sparse matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<T>,
}

/// The discrete Helmholtz operators are complex symmetric (not Hermitian).
pub type ComplexSparseMatrix = CsrMatrix<Complex64>;

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from raw CSR arrays, checking their consistency.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<T>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 {
            return Err(HelmError::DimensionMismatch {
                expected: nrows + 1,
                got: indptr.len(),
            });
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return Err(HelmError::InvalidArgument(
                "CSR index and value arrays disagree".into(),
            ));
        }
        for r in 0..nrows {
            let row = &indices[indptr[r]..indptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c as usize >= ncols) {
                return Err(HelmError::InvalidArgument(format!(
                    "row {r} has unsorted or out-of-range columns"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Sums duplicate triplets. Intended for small matrices; assembly uses [`PatternBuilder`].
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        if let Some(&(r, c, _)) = sorted.iter().find(|t| t.0 >= nrows || t.1 >= ncols) {
            return Err(HelmError::InvalidArgument(format!(
                "triplet ({r}, {c}) outside a {nrows}x{ncols} matrix"
            )));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c as u32);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self
    where
        T: From<f64>,
    {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: vec![T::from(1.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[T]) {
        let range = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// Mutable reference to a structurally present entry.
    pub fn entry_mut(&mut self, r: usize, c: usize) -> Option<&mut T> {
        let range = self.indptr[r]..self.indptr[r + 1];
        let k = self.indices[range.clone()].binary_search(&(c as u32)).ok()?;
        Some(&mut self.values[range.start + k])
    }

    /// Adds a dense row-major local block into the existing pattern.
    ///
    /// Panics if a `(dofs[i], dofs[j])` position is not in the pattern.
    pub fn add_block(&mut self, dofs: &[usize], local: &[T]) {
        let n = dofs.len();
        debug_assert_eq!(local.len(), n * n);
        for (i, &r) in dofs.iter().enumerate() {
            let start = self.indptr[r];
            let cols = &self.indices[start..self.indptr[r + 1]];
            for (j, &c) in dofs.iter().enumerate() {
                let k = cols
                    .binary_search(&(c as u32))
                    .expect("block entry outside the sparsity pattern");
                self.values[start + k] += local[i * n + j];
            }
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k] as usize];
            }
            *yr = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Plain (non-conjugating) transpose.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k] as usize;
                indices[next[c]] = r as u32;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// Largest entrywise modulus of `self - other`; `None` if the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return None;
        }
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let d = if j >= cb.len() || (i < ca.len() && ca[i] < cb[j]) {
                    i += 1;
                    va[i - 1].modulus()
                } else if i >= ca.len() || cb[j] < ca[i] {
                    j += 1;
                    vb[j - 1].modulus()
                } else {
                    i += 1;
                    j += 1;
                    (va[i - 1] - vb[j - 1]).modulus()
                };
                worst = worst.max(d);
            }
        }
        Some(worst)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    /// `max |A - A^T|`, zero for a (complex) symmetric matrix.
    pub fn symmetry_defect(&self) -> f64 {
        self.max_abs_diff(&self.transpose()).unwrap_or(f64::INFINITY)
    }

    /// Lower and upper bandwidth.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lower = 0;
        let mut upper = 0;
        for r in 0..self.nrows {
            let (cols, _) = self.row(r);
            if let (Some(&first), Some(&last)) = (cols.first(), cols.last()) {
                lower = lower.max(r.saturating_sub(first as usize));
                upper = upper.max((last as usize).saturating_sub(r));
            }
        }
        (lower, upper)
    }

    /// Keeps the rows and columns listed in `keep` (in that order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![u32::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new as u32;
        }
        let mut indptr = Vec::with_capacity(keep.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in keep {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let m = map[c as usize];
                if m != u32::MAX {
                    indices.push(m);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        // Column order is preserved only if `keep` is increasing; re-sort rows otherwise.
        let mut out = Self {
            nrows: keep.len(),
            ncols: keep.len(),
            indptr,
            indices,
            values,
        };
        if keep.windows(2).any(|w| w[0] > w[1]) {
            out.sort_rows();
        }
        out
    }

    fn sort_rows(&mut self) {
        for r in 0..self.nrows {
            let range = self.indptr[r]..self.indptr[r + 1];
            let mut pairs: Vec<(u32, T)> = self.indices[range.clone()]
                .iter()
                .copied()
                .zip(self.values[range.clone()].iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            for (k, (c, v)) in pairs.into_iter().enumerate() {
                self.indices[range.start + k] = c;
                self.values[range.start + k] = v;
            }
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        dense
    }

    /// Applies `f` to every stored value.
    pub fn map_values<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl CsrMatrix<f64> {
    /// Applies a real matrix to a complex vector.
    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| x[c as usize] * v)
                    .sum()
            })
            .collect()
    }
}

/// Collects the sparsity pattern of a finite element operator from its local cliques.
#[derive(Debug)]
pub struct PatternBuilder {
    ncols: usize,
    rows: Vec<Vec<u32>>,
}

impl PatternBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    /// Marks every pair of `dofs` as coupled.
    pub fn add_clique(&mut self, dofs: &[usize]) {
        for &r in dofs {
            let row = &mut self.rows[r];
            row.extend(dofs.iter().map(|&c| c as u32));
            // Keep rows bounded while assembling large meshes.
            if row.len() > 256 {
                row.sort_unstable();
                row.dedup();
            }
        }
    }

    pub fn finish<T: Scalar>(self) -> CsrMatrix<T> {
        let nrows = self.rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        for mut row in self.rows {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(&row);
            indptr.push(indices.len());
        }
        let values = vec![T::zero(); indices.len()];
        CsrMatrix {
            nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `sum conj(x_i) y_i`.
pub fn dotc(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `y += alpha x`.
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
