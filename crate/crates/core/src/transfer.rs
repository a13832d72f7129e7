//! Prolongation by finite-element embedding and restriction by its transpose.
//!
//! Fine Lagrange nodes sit on a dyadic sub-lattice of the coarse element, so the interpolation
//! weights are computed from integer lattice offsets and are exact in floating point.

use crate::assembly::{BoundaryCondition, DofLayout};
use crate::error::{HelmError, Result};
use crate::fe::{num_local_dofs, shape_bary};
use crate::mesh::{Grid, GridHierarchy};
use crate::sparse::CsrMatrix;

/// Transfer between levels `l` and `l + 1`.
#[derive(Debug, Clone)]
pub struct TransferPair {
    /// `V_l -> V_{l+1}`, fine rows by coarse columns.
    pub prolong: CsrMatrix<f64>,
    /// `V_{l+1} -> V_l`; the plain transpose of `prolong`.
    pub restrict: CsrMatrix<f64>,
}

/// Builds the transfer pair between level `l` and `l + 1` on all grid nodes.
pub fn build_transfer(grids: &GridHierarchy, l: usize, p: usize) -> Result<TransferPair> {
    build_transfer_with(grids, l, p, BoundaryCondition::Robin)
}

/// As [`build_transfer`], restricted to the unknowns left after eliminating Dirichlet nodes.
pub fn build_transfer_with(grids: &GridHierarchy, l: usize, p: usize, boundary: BoundaryCondition) -> Result<TransferPair> {
    if l + 1 >= grids.levels.len() {
        return Err(HelmError::LevelOutOfRange {
            level: l,
            num_levels: grids.levels.len(),
        });
    }
    let coarse = &grids.levels[l];
    let fine = &grids.levels[l + 1];
    let full = prolongation(coarse, fine, p)?;
    let prolong = if boundary == BoundaryCondition::Robin {
        full
    } else {
        let rows = DofLayout::new(fine, p, boundary)?;
        let cols = DofLayout::new(coarse, p, boundary)?;
        restrict_layout(&full, &rows, &cols)?
    };
    let restrict = prolong.transpose();
    Ok(TransferPair { prolong, restrict })
}

fn restrict_layout(m: &CsrMatrix<f64>, rows: &DofLayout, cols: &DofLayout) -> Result<CsrMatrix<f64>> {
    let mut trip = Vec::new();
    for i in 0..m.nrows() {
        let ri = rows.free[i];
        if ri == u32::MAX {
            continue;
        }
        let (idx, vals) = m.row(i);
        for (&j, &v) in idx.iter().zip(vals) {
            let cj = cols.free[j as usize];
            if cj != u32::MAX {
                trip.push((ri as usize, cj as usize, v));
            }
        }
    }
    CsrMatrix::from_triplets(rows.n_free, cols.n_free, &trip)
}

fn prolongation(coarse: &Grid, fine: &Grid, p: usize) -> Result<CsrMatrix<f64>> {
    let cmap = coarse.dof_map(p)?;
    let fmap = fine.dof_map(p)?;
    let dim = coarse.dim;
    let nloc = num_local_dofs(dim, p);
    let nc = coarse.cells;
    // Offsets inside a coarse cell are measured in units of 1 / (2p) of the cell width.
    let sub = 2 * p;
    let fine_stride = p * fine.cells + 1;
    let mut vals = [0.0; 6];
    let mut dlam = [[0.0; 3]; 6];
    let mut trip = Vec::with_capacity(fmap.n_dofs * nloc);

    let split = |idx: usize| -> (usize, f64) {
        let cell = (idx / sub).min(nc - 1);
        (cell, (idx - cell * sub) as f64 / sub as f64)
    };

    for fdof in 0..fmap.n_dofs {
        let (element, lam) = if dim == 1 {
            let (cell, a) = split(fdof);
            (cell, [1.0 - a, a, 0.0])
        } else {
            let (fi, fj) = (fdof % fine_stride, fdof / fine_stride);
            let (ci, a) = split(fi);
            let (cj, b) = split(fj);
            let cell = ci + cj * nc;
            if b <= a {
                (2 * cell, [1.0 - a, a - b, b])
            } else {
                (2 * cell + 1, [1.0 - b, a, b - a])
            }
        };
        shape_bary(dim, p, &lam, &mut vals, &mut dlam[..nloc]);
        for (k, &cd) in cmap.element(element).iter().enumerate() {
            if vals[k] != 0.0 {
                trip.push((fdof, cd, vals[k]));
            }
        }
    }
    CsrMatrix::from_triplets(fmap.n_dofs, cmap.n_dofs, &trip)
}
