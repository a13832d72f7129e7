//! Non-recursive multilevel cycle used as the preconditioner of the outer flexible GMRES.
//!
//! One cycle visits the levels `0, 1, ..., L` (down pass) and then `L, ..., 0` (up pass). Every
//! stage restricts the current finest-level residual directly to level `l`, computes a
//! correction there and adds its prolongation scaled by `mu_l`:
//!
//! * level 0: exact solve with the correction operator;
//! * classically smoothed levels: `m1` Jacobi or Gauss-Seidel sweeps from zero (the up pass uses
//!   the transposed sweep, i.e. backward Gauss-Seidel);
//! * GMRES-smoothed levels: `m1` (down) or `m2` (up) GMRES steps on the correction operator.
//!
//! Which discretization (CIP, FEM, shifted Laplacian) feeds the residual, the classical
//! smoothing and the corrections is set by a [`CycleVariant`].

use num_complex::Complex64;

use crate::assembly::{assemble_matrix, BoundaryCondition, Flavor, HelmholtzProblem};
use crate::direct::DirectLu;
use crate::error::{HelmError, Result};
use crate::krylov::{gmres_relax, Preconditioner};
use crate::mesh::GridHierarchy;
use crate::smoothers::{gauss_seidel_with, jacobi_with, ClassicalSmoother, LevelSmoother, SmootherPlan, SweepDirection};
use crate::sparse::{norm2, ComplexSparseMatrix};
use crate::transfer::{build_transfer_with, TransferPair};

/// Default limit on the size of [`CyclePlan::error_operator_dense`].
pub const DENSE_CAP: usize = 4096;

/// Discretizations used by the cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleVariant {
    /// Operator whose residual is restricted (the finest-level system matrix).
    pub residual: Flavor,
    /// Operator relaxed on classically smoothed levels.
    pub smoothing: Flavor,
    /// Operator on GMRES-smoothed levels and on level 0.
    pub correction: Flavor,
}

impl CycleVariant {
    /// CIP on every level.
    pub const CIP_ALL: Self = Self {
        residual: Flavor::Cip,
        smoothing: Flavor::Cip,
        correction: Flavor::Cip,
    };
    /// FEM residual and classical smoothing, CIP coarse corrections.
    pub const FEM_FINE_CIP_COARSE: Self = Self {
        residual: Flavor::Fem,
        smoothing: Flavor::Fem,
        correction: Flavor::Cip,
    };
    /// FEM on every level.
    pub const FEM_ALL: Self = Self {
        residual: Flavor::Fem,
        smoothing: Flavor::Fem,
        correction: Flavor::Fem,
    };
    /// FEM residual with CIP smoothing and corrections on all levels.
    pub const FEM_RESIDUAL_CIP_SMOOTHING: Self = Self {
        residual: Flavor::Fem,
        smoothing: Flavor::Cip,
        correction: Flavor::Cip,
    };

    /// FEM residual with shifted-Laplacian smoothing and corrections.
    pub fn shifted_laplacian(beta: f64) -> Self {
        Self {
            residual: Flavor::Fem,
            smoothing: Flavor::ShiftedLaplacian { beta },
            correction: Flavor::ShiftedLaplacian { beta },
        }
    }

    /// Inverse of [`CycleVariant::name`]; `beta` is only read by `shifted_laplacian`.
    pub fn from_name(name: &str, beta: f64) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "cip_all" => Ok(Self::CIP_ALL),
            "fem_fine_cip_coarse" => Ok(Self::FEM_FINE_CIP_COARSE),
            "fem_all" => Ok(Self::FEM_ALL),
            "fem_residual_cip_smoothing" => Ok(Self::FEM_RESIDUAL_CIP_SMOOTHING),
            "shifted_laplacian" => Ok(Self::shifted_laplacian(beta)),
            other => Err(HelmError::InvalidArgument(format!(
                "unknown algorithm {other:?} (expected cip_all, fem_fine_cip_coarse, fem_all, fem_residual_cip_smoothing or shifted_laplacian)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::CIP_ALL => "cip_all".into(),
            Self::FEM_FINE_CIP_COARSE => "fem_fine_cip_coarse".into(),
            Self::FEM_ALL => "fem_all".into(),
            Self::FEM_RESIDUAL_CIP_SMOOTHING => "fem_residual_cip_smoothing".into(),
            Self {
                residual: Flavor::Fem,
                smoothing: Flavor::ShiftedLaplacian { beta },
                correction: Flavor::ShiftedLaplacian { beta: b2 },
            } if beta == b2 => format!("shifted_laplacian({beta})"),
            _ => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleOptions {
    /// Scaling `mu_l` used on every level unless `mu_levels` is given.
    pub mu: f64,
    pub mu_levels: Option<Vec<f64>>,
    /// Sweeps / GMRES steps in the down pass.
    pub m1: usize,
    /// GMRES steps in the up pass.
    pub m2: usize,
    /// Classification threshold on `kappa h_l / p`.
    pub alpha: f64,
    pub classical: ClassicalSmoother,
    /// Run the up pass; without it the cycle is the non-symmetric down-only version.
    pub post_pass: bool,
    /// Replaces the classification-based smoother choice per level.
    pub level_smoothers: Option<Vec<LevelSmoother>>,
    /// Replaces the variant's operator choice per level.
    pub level_flavors: Option<Vec<Flavor>>,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            mu: 0.5,
            mu_levels: None,
            m1: 1,
            m2: 1,
            alpha: 0.5,
            classical: ClassicalSmoother::GaussSeidel,
            post_pass: true,
            level_smoothers: None,
            level_flavors: None,
        }
    }
}

#[derive(Debug, Clone)]
struct LevelOperator {
    smoother: LevelSmoother,
    flavor: Flavor,
    matrix: ComplexSparseMatrix,
    inv_diag: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Down,
    Up,
}

/// One stage of a traced cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStage {
    /// Position in the sweep, 1-based: down stages `1..=L+1`, up stages `L+2..=2L+2`.
    pub index: usize,
    pub pass: Pass,
    pub level: usize,
    pub smoother: &'static str,
    /// Finest-level residual norm before the stage's correction.
    pub residual_before: f64,
    /// Finest-level residual norm after it.
    pub residual_after: f64,
}

/// Everything a cycle needs: per-level operators, transfers, scalings and the coarse factorization.
#[derive(Debug, Clone)]
pub struct CyclePlan {
    pub variant: CycleVariant,
    pub p: usize,
    pub mu: Vec<f64>,
    pub m1: usize,
    pub m2: usize,
    pub post_pass: bool,
    pub smoother_plan: SmootherPlan,
    levels: Vec<LevelOperator>,
    /// `None` when the finest level operator already is the residual operator.
    residual: Option<ComplexSparseMatrix>,
    transfers: Vec<TransferPair>,
    coarse: DirectLu,
}

impl CyclePlan {
    pub fn build(hierarchy: &GridHierarchy, problem: &HelmholtzProblem, p: usize, variant: CycleVariant, options: &CycleOptions) -> Result<Self> {
        let nl = hierarchy.levels.len();
        let top = nl - 1;
        if options.m1 == 0 || options.m2 == 0 {
            return Err(HelmError::InvalidArgument("m1 and m2 must be >= 1".into()));
        }
        let mu = match &options.mu_levels {
            Some(m) if m.len() != nl => {
                return Err(HelmError::DimensionMismatch {
                    expected: nl,
                    got: m.len(),
                })
            }
            Some(m) => m.clone(),
            None => vec![options.mu; nl],
        };
        if let Some(bad) = mu.iter().find(|m| !(**m > 0.0 && **m <= 1.0)) {
            return Err(HelmError::InvalidArgument(format!("mu must lie in (0, 1], got {bad}")));
        }

        let mut smoother_plan = SmootherPlan::new(hierarchy, problem.kappa.max(), p, options.alpha, options.classical, options.m1)?;
        if let Some(over) = &options.level_smoothers {
            if over.len() != nl {
                return Err(HelmError::DimensionMismatch {
                    expected: nl,
                    got: over.len(),
                });
            }
            if over[0] != LevelSmoother::Direct || over[1..].contains(&LevelSmoother::Direct) {
                return Err(HelmError::InvalidArgument("level 0, and only level 0, is solved directly".into()));
            }
            smoother_plan.levels = over.clone();
            smoother_plan.classical = (1..nl).filter(|&l| over[l].is_linear()).collect();
            smoother_plan.gmres = (1..nl).filter(|&l| !over[l].is_linear()).collect();
        }
        if let Some(f) = &options.level_flavors {
            if f.len() != nl {
                return Err(HelmError::DimensionMismatch {
                    expected: nl,
                    got: f.len(),
                });
            }
        }

        let mut levels = Vec::with_capacity(nl);
        for (l, grid) in hierarchy.levels.iter().enumerate() {
            let smoother = smoother_plan.levels[l];
            let flavor = match &options.level_flavors {
                Some(f) => f[l],
                None => match smoother {
                    LevelSmoother::Jacobi { .. } | LevelSmoother::GaussSeidel => variant.smoothing,
                    _ => variant.correction,
                },
            };
            // The impedance term `+i kappa` damps with a positive imaginary part. A shift of the
            // opposite sign fights it and the cycle barely reduces the residual, so the shift
            // follows the boundary term. Periodic grids have no boundary term.
            let flavor = match flavor {
                Flavor::ShiftedLaplacian { beta } if problem.boundary == BoundaryCondition::Robin && !grid.boundary_facets.is_empty() => Flavor::ShiftedLaplacian { beta: -beta },
                f => f,
            };
            let matrix = assemble_matrix(grid, problem, p, flavor)?;
            let inv_diag = if matches!(smoother, LevelSmoother::Jacobi { .. } | LevelSmoother::GaussSeidel) {
                matrix
                    .diagonal()
                    .into_iter()
                    .enumerate()
                    .map(|(row, d)| {
                        if d == Complex64::new(0.0, 0.0) {
                            Err(HelmError::ZeroDiagonal { row })
                        } else {
                            Ok(1.0 / d)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            levels.push(LevelOperator {
                smoother,
                flavor,
                matrix,
                inv_diag,
            });
        }
        let residual = if levels[top].flavor == variant.residual {
            None
        } else {
            Some(assemble_matrix(hierarchy.finest(), problem, p, variant.residual)?)
        };
        let transfers = (0..top)
            .map(|l| build_transfer_with(hierarchy, l, p, problem.boundary))
            .collect::<Result<Vec<_>>>()?;
        let coarse = DirectLu::factor(&levels[0].matrix).map_err(|e| HelmError::CoarseSolve {
            level: 0,
            source: Box::new(e),
        })?;
        Ok(Self {
            variant,
            p,
            mu,
            m1: options.m1,
            m2: options.m2,
            post_pass: options.post_pass,
            smoother_plan,
            levels,
            residual,
            transfers,
            coarse,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn fine_dim(&self) -> usize {
        self.residual_matrix().nrows()
    }

    /// The finest-level system matrix.
    pub fn residual_matrix(&self) -> &ComplexSparseMatrix {
        self.residual.as_ref().unwrap_or(&self.levels.last().unwrap().matrix)
    }

    pub fn level_matrix(&self, l: usize) -> &ComplexSparseMatrix {
        &self.levels[l].matrix
    }

    pub fn level_flavor(&self, l: usize) -> Flavor {
        self.levels[l].flavor
    }

    pub fn level_smoother(&self, l: usize) -> LevelSmoother {
        self.levels[l].smoother
    }

    pub fn transfers(&self) -> &[TransferPair] {
        &self.transfers
    }

    /// Levels smoothed by GMRES, which make the cycle nonlinear.
    pub fn nonlinear_levels(&self) -> Vec<usize> {
        (0..self.levels.len()).filter(|&l| !self.levels[l].smoother.is_linear()).collect()
    }

    pub fn is_linear(&self) -> bool {
        self.nonlinear_levels().is_empty()
    }

    fn restrict_to(&self, l: usize, r: &[Complex64]) -> Vec<Complex64> {
        let mut v = r.to_vec();
        for k in (l..self.transfers.len()).rev() {
            v = self.transfers[k].restrict.apply_complex(&v);
        }
        v
    }

    fn prolong_from(&self, l: usize, w: Vec<Complex64>) -> Vec<Complex64> {
        let mut v = w;
        for k in l..self.transfers.len() {
            v = self.transfers[k].prolong.apply_complex(&v);
        }
        v
    }

    fn level_correction(&self, l: usize, r: &[Complex64], pass: Pass) -> Result<Vec<Complex64>> {
        let op = &self.levels[l];
        let zero = Complex64::new(0.0, 0.0);
        match op.smoother {
            LevelSmoother::Direct => self.coarse.solve(r).map_err(|e| HelmError::CoarseSolve {
                level: l,
                source: Box::new(e),
            }),
            LevelSmoother::Jacobi { omega } => {
                let mut w = vec![zero; r.len()];
                jacobi_with(&op.matrix, &op.inv_diag, &mut w, r, omega, self.m1);
                Ok(w)
            }
            LevelSmoother::GaussSeidel => {
                let mut w = vec![zero; r.len()];
                let dir = match pass {
                    Pass::Down => SweepDirection::Forward,
                    Pass::Up => SweepDirection::Backward,
                };
                gauss_seidel_with(&op.matrix, &op.inv_diag, &mut w, r, self.m1, dir);
                Ok(w)
            }
            LevelSmoother::GmresRelax { .. } => {
                let m = match pass {
                    Pass::Down => self.m1,
                    Pass::Up => self.m2,
                };
                Ok(gmres_relax(&op.matrix, r, m))
            }
        }
    }

    fn run(&self, rhs: &[Complex64], v_in: &[Complex64], mut trace: Option<&mut Vec<CycleStage>>) -> Result<Vec<Complex64>> {
        let n = self.fine_dim();
        if rhs.len() != n || v_in.len() != n {
            return Err(HelmError::DimensionMismatch {
                expected: n,
                got: if rhs.len() != n { rhs.len() } else { v_in.len() },
            });
        }
        let a = self.residual_matrix();
        let top = self.levels.len() - 1;
        let mut v = v_in.to_vec();
        let mut ax = vec![Complex64::new(0.0, 0.0); n];
        let mut order: Vec<(Pass, usize)> = (0..=top).map(|l| (Pass::Down, l)).collect();
        if self.post_pass {
            order.extend((0..=top).rev().map(|l| (Pass::Up, l)));
        }
        for (stage, &(pass, l)) in order.iter().enumerate() {
            a.matvec_into(&v, &mut ax);
            let r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, q)| b - q).collect();
            let rl = self.restrict_to(l, &r);
            let w = self.level_correction(l, &rl, pass)?;
            let pw = self.prolong_from(l, w);
            let mu = self.mu[l];
            for (vi, wi) in v.iter_mut().zip(&pw) {
                *vi += mu * wi;
            }
            if let Some(t) = trace.as_deref_mut() {
                a.matvec_into(&v, &mut ax);
                let after: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, q)| b - q).collect();
                t.push(CycleStage {
                    index: stage + 1,
                    pass,
                    level: l,
                    smoother: self.levels[l].smoother.name(),
                    residual_before: norm2(&r),
                    residual_after: norm2(&after),
                });
            }
        }
        Ok(v)
    }

    /// One cycle for `A_L v = rhs` starting from `v_in`.
    pub fn apply_cycle(&self, rhs: &[Complex64], v_in: &[Complex64]) -> Result<Vec<Complex64>> {
        self.run(rhs, v_in, None)
    }

    /// As [`CyclePlan::apply_cycle`], recording the residual norm around every stage.
    pub fn apply_cycle_traced(&self, rhs: &[Complex64], v_in: &[Complex64]) -> Result<(Vec<Complex64>, Vec<CycleStage>)> {
        let mut trace = Vec::new();
        let v = self.run(rhs, v_in, Some(&mut trace))?;
        Ok((v, trace))
    }

    /// Dense error propagation matrix `E` (row-major rows), column `j` being the cycle applied
    /// to the unit error `e_j` with zero right-hand side.
    pub fn error_operator_dense(&self, cap: usize) -> Result<Vec<Vec<Complex64>>> {
        let bad = self.nonlinear_levels();
        if !bad.is_empty() {
            return Err(HelmError::NonlinearCycle(bad));
        }
        let n = self.fine_dim();
        if n > cap {
            return Err(HelmError::DenseCapExceeded { size: n, cap });
        }
        let zero = Complex64::new(0.0, 0.0);
        let rhs = vec![zero; n];
        let mut e = vec![vec![zero; n]; n];
        let mut unit = vec![zero; n];
        for j in 0..n {
            unit[j] = Complex64::new(1.0, 0.0);
            let col = self.apply_cycle(&rhs, &unit)?;
            unit[j] = zero;
            for i in 0..n {
                e[i][j] = col[i];
            }
        }
        Ok(e)
    }
}

impl Preconditioner for CyclePlan {
    fn apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        let zero = vec![Complex64::new(0.0, 0.0); r.len()];
        self.apply_cycle(r, &zero)
    }
}

/// Builds the plan for the given hierarchy and problem.
pub fn build_cycle(hierarchy: &GridHierarchy, problem: &HelmholtzProblem, p: usize, variant: CycleVariant, options: &CycleOptions) -> Result<CyclePlan> {
    CyclePlan::build(hierarchy, problem, p, variant, options)
}

pub fn apply_cycle(plan: &CyclePlan, fine_rhs: &[Complex64], v_in: &[Complex64]) -> Result<Vec<Complex64>> {
    plan.apply_cycle(fine_rhs, v_in)
}

/// Dense error operator with the default size cap.
pub fn error_operator_dense(plan: &CyclePlan) -> Result<Vec<Vec<Complex64>>> {
    plan.error_operator_dense(DENSE_CAP)
}

/// Whether a boundary condition keeps every node as an unknown.
pub fn keeps_all_nodes(boundary: BoundaryCondition) -> bool {
    boundary == BoundaryCondition::Robin
}
