//! Multilevel preconditioning of high-wave-number Helmholtz problems.
//!
//! The crate assembles P1/P2 finite-element and continuous-interior-penalty (CIP) discretizations
//! of `-Δu - κ²u = f` on the unit square (and on 1D intervals for analysis), builds nested grid
//! hierarchies with their transfers, and runs a non-recursive multilevel cycle as the
//! preconditioner of flexible GMRES. Coarse levels use the CIP operator, whose penalty shifts
//! the discrete wave number and keeps coarse corrections useful where plain FEM ones are not.
//! Levels with `κh/p` below a threshold are relaxed by Jacobi or Gauss-Seidel, the others by a
//! few GMRES steps.
//!
//! The [`lfa`] module provides the matching 1D Local Fourier Analysis.
//!
//! ```
//! use helmwave_core::prelude::*;
//! use num_complex::Complex64;
//!
//! let grids = build_hierarchy(2, 4, 3).unwrap();
//! let problem = HelmholtzProblem::bessel(10.0, Complex64::new(-0.07, 0.01));
//! let plan = CyclePlan::build(&grids, &problem, 1, CycleVariant::CIP_ALL, &CycleOptions::default()).unwrap();
//! let b = assemble_load(grids.finest(), &problem, 1).unwrap();
//! let (x, report) = fgmres(plan.residual_matrix(), &b, &plan, None, KrylovOptions::default()).unwrap();
//! assert!(report.converged);
//! assert_eq!(x.len(), 17 * 17);
//! ```

pub mod assembly;
pub mod bessel;
pub mod direct;
pub mod error;
pub mod fe;
pub mod io;
pub mod krylov;
pub mod ldlt;
pub mod lfa;
pub mod mesh;
pub mod mlprecond;
pub mod smoothers;
pub mod sparse;
pub mod transfer;

pub use error::{HelmError, Result};

pub mod prelude {
    pub use crate::assembly::{assemble_cip, assemble_fem, assemble_load, assemble_matrix, assemble_shifted_laplacian, BoundaryCondition, Flavor, HelmholtzProblem, Source, Wavenumber};
    pub use crate::error::{HelmError, Result};
    pub use crate::krylov::{fgmres, fgmres_low_memory, gmres, gmres_relax, KrylovOptions, LinearOperator, Preconditioner, SolveReport};
    pub use crate::mesh::{build_hierarchy, build_hierarchy_with, Grid, GridHierarchy, MeshSpec};
    pub use crate::mlprecond::{CycleOptions, CyclePlan, CycleVariant};
    pub use crate::smoothers::{ClassicalSmoother, LevelSmoother};
    pub use crate::sparse::{ComplexSparseMatrix, CsrMatrix};
    pub use crate::transfer::{build_transfer, TransferPair};
}
