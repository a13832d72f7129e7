//! Sparse `L D L^T` factorization of complex symmetric matrices.
//!
//! The Helmholtz, CIP and shifted-Laplacian matrices satisfy `A = A^T` (no conjugation), so a
//! symmetric factorization without pivoting halves the storage of an LU and lets the ordering
//! be chosen from the graph alone. Unknowns are ordered by nested dissection with level-set
//! separators, which keeps the fill of 2D grid matrices at `O(n log n)`. The numeric phase is
//! the up-looking simplicial algorithm driven by the elimination tree.

use num_complex::Complex64;

use crate::error::{HelmError, Result};
use crate::sparse::ComplexSparseMatrix;

const NONE: u32 = u32::MAX;

/// Subgraphs at most this large are ordered as they come.
const LEAF: usize = 64;

/// Symmetric adjacency without the diagonal.
struct Graph {
    ptr: Vec<usize>,
    adj: Vec<u32>,
}

impl Graph {
    fn from_matrix(a: &ComplexSparseMatrix) -> Self {
        let n = a.nrows();
        let mut deg = vec![0usize; n];
        for r in 0..n {
            for &c in a.row(r).0 {
                let c = c as usize;
                if c != r {
                    deg[r] += 1;
                    deg[c] += 1;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for r in 0..n {
            ptr[r + 1] = ptr[r] + deg[r];
        }
        let mut fill = ptr[..n].to_vec();
        let mut adj = vec![0u32; ptr[n]];
        for r in 0..n {
            for &c in a.row(r).0 {
                let c = c as usize;
                if c != r {
                    adj[fill[r]] = c as u32;
                    fill[r] += 1;
                    adj[fill[c]] = r as u32;
                    fill[c] += 1;
                }
            }
        }
        // Both directions were inserted, so symmetric entries appear twice.
        let mut out_ptr = vec![0usize; n + 1];
        let mut out = Vec::with_capacity(adj.len() / 2 + n);
        for r in 0..n {
            let row = &mut adj[ptr[r]..ptr[r + 1]];
            row.sort_unstable();
            let mut last = NONE;
            for &c in row.iter() {
                if c != last {
                    out.push(c);
                    last = c;
                }
            }
            out_ptr[r + 1] = out.len();
        }
        Self { ptr: out_ptr, adj: out }
    }

    fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[self.ptr[v as usize]..self.ptr[v as usize + 1]]
    }
}

/// Breadth-first level structure restricted to vertices whose `owner` equals `task`.
struct Levels {
    order: Vec<u32>,
    starts: Vec<usize>,
}

fn bfs(g: &Graph, root: u32, owner: &[u32], task: u32, seen: &mut [u32], stamp: u32) -> Levels {
    let mut order = vec![root];
    let mut starts = vec![0];
    seen[root as usize] = stamp;
    let mut head = 0;
    while head < order.len() {
        let end = order.len();
        starts.push(end);
        for k in head..end {
            let v = order[k];
            for &w in g.neighbors(v) {
                if owner[w as usize] == task && seen[w as usize] != stamp {
                    seen[w as usize] = stamp;
                    order.push(w);
                }
            }
        }
        head = end;
    }
    starts.pop();
    starts.push(order.len());
    Levels { order, starts }
}

/// Fill-reducing permutation: `perm[new] = old`.
pub fn nested_dissection(a: &ComplexSparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let g = Graph::from_matrix(a);
    let mut owner = vec![0u32; n];
    let mut seen = vec![0u32; n];
    let mut stamp = 0u32;
    let mut next_task = 1u32;
    let mut perm = Vec::with_capacity(n);

    enum Task {
        Split(u32, Vec<u32>),
        Emit(Vec<u32>),
    }
    let mut stack = vec![Task::Split(0, (0..n as u32).collect())];
    while let Some(task) = stack.pop() {
        let (id, nodes) = match task {
            Task::Emit(nodes) => {
                perm.extend(nodes.iter().map(|&v| v as usize));
                continue;
            }
            Task::Split(id, nodes) => (id, nodes),
        };
        if nodes.len() <= LEAF {
            perm.extend(nodes.iter().map(|&v| v as usize));
            continue;
        }
        stamp += 1;
        let first = bfs(&g, nodes[0], &owner, id, &mut seen, stamp);
        if first.order.len() < nodes.len() {
            // Disconnected: order each component on its own.
            let mut comps = vec![first.order];
            for &v in &nodes {
                if seen[v as usize] != stamp {
                    comps.push(bfs(&g, v, &owner, id, &mut seen, stamp).order);
                }
            }
            for comp in comps.into_iter().rev() {
                let cid = next_task;
                next_task += 1;
                for &v in &comp {
                    owner[v as usize] = cid;
                }
                stack.push(Task::Split(cid, comp));
            }
            continue;
        }
        // Pseudo-peripheral root: restart from a minimum-degree vertex of the last level
        // while the eccentricity grows.
        let mut levels = first;
        for _ in 0..4 {
            let depth = levels.starts.len() - 1;
            let last = &levels.order[levels.starts[depth - 1]..];
            let cand = *last.iter().min_by_key(|&&v| g.neighbors(v).len()).unwrap();
            stamp += 1;
            let next = bfs(&g, cand, &owner, id, &mut seen, stamp);
            if next.starts.len() <= levels.starts.len() {
                break;
            }
            levels = next;
        }
        let depth = levels.starts.len() - 1;
        if depth < 3 {
            perm.extend(nodes.iter().map(|&v| v as usize));
            continue;
        }
        let half = nodes.len() / 2;
        let mut mid = (1..depth - 1).find(|&l| levels.starts[l + 1] > half).unwrap_or(depth - 2);
        mid = mid.clamp(1, depth - 2);
        let lo = levels.order[..levels.starts[mid]].to_vec();
        let sep = levels.order[levels.starts[mid]..levels.starts[mid + 1]].to_vec();
        let hi = levels.order[levels.starts[mid + 1]..].to_vec();
        for &v in &sep {
            owner[v as usize] = NONE;
        }
        stack.push(Task::Emit(sep));
        for part in [hi, lo] {
            let cid = next_task;
            next_task += 1;
            for &v in &part {
                owner[v as usize] = cid;
            }
            stack.push(Task::Split(cid, part));
        }
    }
    perm
}

/// `P A P^T = L D L^T` with unit lower triangular `L` stored by columns.
#[derive(Debug, Clone)]
pub struct SparseLdlt {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<Complex64>,
    diag: Vec<Complex64>,
}

impl SparseLdlt {
    /// Factors a complex symmetric matrix; only the lower triangle is read.
    pub fn factor(a: &ComplexSparseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(HelmError::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        if n >= NONE as usize {
            return Err(HelmError::IndexOverflow(n as u128));
        }
        let perm = nested_dissection(a);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // Rows of the permuted lower triangle, `C[k, i]` for `i <= k`.
        let mut cnt = vec![0usize; n + 1];
        for r in 0..n {
            let k = iperm[r];
            cnt[k + 1] += a.row(r).0.iter().filter(|&&c| iperm[c as usize] <= k).count();
        }
        for k in 0..n {
            cnt[k + 1] += cnt[k];
        }
        let mut fill = cnt[..n].to_vec();
        let mut c_idx = vec![0u32; cnt[n]];
        let mut c_val = vec![Complex64::new(0.0, 0.0); cnt[n]];
        for r in 0..n {
            let k = iperm[r];
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let i = iperm[c as usize];
                if i <= k {
                    c_idx[fill[k]] = i as u32;
                    c_val[fill[k]] = v;
                    fill[k] += 1;
                }
            }
        }
        let row = |k: usize| cnt[k]..cnt[k + 1];

        // Elimination tree and column counts.
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k as u32;
            for p in row(k) {
                let mut i = c_idx[p] as usize;
                while i < k && flag[i] != k as u32 {
                    if parent[i] == NONE {
                        parent[i] = k as u32;
                    }
                    lnz[i] += 1;
                    flag[i] = k as u32;
                    i = parent[i] as usize;
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        let total = col_ptr[n];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        if row_idx.try_reserve_exact(total).is_err() || values.try_reserve_exact(total).is_err() {
            return Err(HelmError::InvalidArgument(format!("factor with {total} nonzeros does not fit in memory")));
        }
        row_idx.resize(total, 0u32);
        values.resize(total, Complex64::new(0.0, 0.0));

        // Up-looking numeric factorization: row k of L solves a triangular system whose
        // pattern is the reach of row k of C in the elimination tree.
        let scale = c_val.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let tiny = scale * f64::EPSILON * 1e-3;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = vec![zero; n];
        let mut pattern = vec![0u32; n];
        let mut diag = vec![zero; n];
        lnz.fill(0);
        flag.fill(NONE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k as u32;
            for p in row(k) {
                let mut i = c_idx[p] as usize;
                y[i] += c_val[p];
                let mut len = 0;
                while flag[i] != k as u32 {
                    pattern[len] = i as u32;
                    len += 1;
                    flag[i] = k as u32;
                    i = parent[i] as usize;
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = zero;
            for t in top..n {
                let i = pattern[t] as usize;
                let yi = y[i];
                y[i] = zero;
                let (start, end) = (col_ptr[i], col_ptr[i] + lnz[i]);
                for q in start..end {
                    y[row_idx[q] as usize] -= values[q] * yi;
                }
                let l = yi / diag[i];
                dk -= l * yi;
                row_idx[end] = k as u32;
                values[end] = l;
                lnz[i] += 1;
            }
            if !(dk.norm() > tiny) {
                return Err(HelmError::Singular { pivot: k });
            }
            diag[k] = dk;
        }
        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros of `L` below the diagonal.
    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.n {
            return Err(HelmError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for j in 0..self.n {
            let xj = x[j];
            for q in self.col_ptr[j]..self.col_ptr[j + 1] {
                x[self.row_idx[q] as usize] -= self.values[q] * xj;
            }
        }
        for (v, d) in x.iter_mut().zip(&self.diag) {
            *v /= d;
        }
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for q in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc -= self.values[q] * x[self.row_idx[q] as usize];
            }
            x[j] = acc;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        Ok(out)
    }
}
