//! Iteration-count tables: preset series, overrides, the size guard and the PGMRES runs.

use std::time::Instant;

use helmwave_core::krylov::{fgmres, fgmres_low_memory, KrylovOptions};
use helmwave_core::mlprecond::{CycleOptions, CyclePlan, CycleVariant};
use helmwave_core::prelude::{assemble_load, build_hierarchy, HelmholtzProblem};
use helmwave_core::smoothers::ClassicalSmoother;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{parse_algorithm, ClassicalKind, ConfigError, Experiment, ExperimentConfig, SourceKind};

/// Runs above this many fine unknowns need `--override-size-guard`.
pub const SIZE_GUARD: usize = 5_000_000;

/// Coarsest cells per side with `kappa h_0 / p ~ 2`, `h_0 = sqrt(2) / n_0` the element diameter,
/// rounded to a power of two.
pub fn coarse_cells_for(kappa: f64, p: usize) -> usize {
    let target = kappa * std::f64::consts::SQRT_2 / (2.0 * p as f64);
    1usize << target.log2().round().max(0.0) as u32
}

/// One row group of a table: fixed discretization and solver, several grid counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// Largest wave number (`kappa_2` for the quadrant problem).
    pub kappa: f64,
    /// `kappa_2 / kappa_1` for the quadrant problem.
    pub q: Option<f64>,
    pub p: usize,
    pub algorithm: String,
    pub m2: usize,
    pub beta: f64,
    /// Number of grids per run; the coarsest has `coarse_cells` cells per side.
    pub grids: Vec<usize>,
    pub coarse_cells: usize,
    /// Label printed in the `level` column for each run.
    pub labels: Vec<usize>,
}

impl Series {
    fn preset(kappa: f64, p: usize, algorithm: &str, m2: usize, grids: &[usize]) -> Self {
        Self {
            name: format!("k{kappa}_p{p}"),
            kappa,
            q: None,
            p,
            algorithm: algorithm.into(),
            m2,
            beta: 0.0,
            grids: grids.to_vec(),
            coarse_cells: coarse_cells_for(kappa, p),
            labels: grids.to_vec(),
        }
    }

    fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn fine_dofs(&self, grids: usize) -> usize {
        let n = (self.coarse_cells << (grids - 1)) * self.p + 1;
        n * n
    }
}

/// Preset series of `table1`..`table7`; levels count grids.
pub fn preset(table: u8) -> Vec<Series> {
    const ALG2: &str = "fem_fine_cip_coarse";
    match table {
        1 => vec![Series::preset(100.0, 1, "cip_all", 1, &[2, 3, 4, 5]), Series::preset(100.0, 2, "cip_all", 1, &[2, 3, 4, 5])],
        2 => vec![
            Series::preset(100.0, 1, "fem_all", 1, &[2, 3, 4, 5]).named("k100_m2=1"),
            Series::preset(100.0, 1, "fem_all", 20, &[2, 3, 4, 5]).named("k100_m2=20"),
            Series::preset(200.0, 1, "fem_all", 1, &[2, 3, 4, 5]).named("k200_m2=1"),
        ],
        3 => {
            let mut sl = Series::preset(100.0, 1, "shifted_laplacian", 1, &[2, 3, 4, 5]).named("case1_shifted_laplacian");
            sl.beta = 0.2;
            vec![sl, Series::preset(100.0, 1, "fem_residual_cip_smoothing", 1, &[2, 3, 4, 5]).named("case2_cip_smoothing")]
        }
        4 => vec![
            Series::preset(100.0, 1, ALG2, 1, &[3, 4, 5]).named("p1_m2=1"),
            Series::preset(100.0, 1, ALG2, 10, &[3, 4, 5]).named("p1_m2=10"),
            Series::preset(100.0, 2, ALG2, 1, &[3, 4, 5]).named("p2_m2=1"),
            Series::preset(100.0, 2, ALG2, 10, &[3, 4, 5]).named("p2_m2=10"),
        ],
        // Fixed h_0 = sqrt(2)/512 (P1), i.e. kappa h_0 / p between 1.1 and 1.7.
        5 => [400.0, 500.0, 600.0]
            .iter()
            .flat_map(|&k| {
                (1..=2).map(move |p| Series {
                    coarse_cells: 512 / p,
                    ..Series::preset(k, p, ALG2, 1, &[2, 3])
                })
            })
            .collect(),
        6 => [(50.0, [3, 4, 5]), (200.0, [3, 4, 5]), (360.0, [2, 3, 4])].iter().flat_map(|(k, g)| (1..=2).map(move |p| Series::preset(*k, p, ALG2, 1, g))).collect(),
        7 => {
            let mut out = Vec::new();
            for k2 in [180.0, 300.0] {
                for p in 1..=2 {
                    for q in [3.0, 10.0] {
                        let mut s = Series::preset(k2, p, ALG2, 1, &[3, 4]).named(format!("k2={k2}_p{p}_q{q}"));
                        s.q = Some(q);
                        out.push(s);
                    }
                }
            }
            out
        }
        _ => unreachable!("validated table number"),
    }
}

/// Solver knobs shared by every series of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub sigma: Option<Complex64>,
    pub m1: usize,
    pub mu: f64,
    pub alpha: f64,
    pub omega: f64,
    pub classical: ClassicalKind,
    pub tol: f64,
    pub max_iter: usize,
    pub source: SourceKind,
}

impl SolverSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let gaussian = cfg.experiment() == Experiment::Table(7) || (cfg.experiment() == Experiment::Custom && cfg.kappa1.is_some());
        Self {
            sigma: cfg.sigma,
            m1: cfg.m1.unwrap_or(1),
            mu: cfg.mu.unwrap_or(0.5),
            alpha: cfg.alpha.unwrap_or(0.5),
            omega: cfg.omega.unwrap_or(0.6),
            classical: cfg.classical.unwrap_or(ClassicalKind::GaussSeidel),
            tol: cfg.tol.unwrap_or(1e-6),
            max_iter: cfg.max_iter.unwrap_or(200),
            source: cfg.source.unwrap_or(if gaussian { SourceKind::Gaussian } else { SourceKind::Bessel }),
        }
    }

    pub fn sigma_for(&self, p: usize) -> Complex64 {
        self.sigma.unwrap_or_else(|| helmwave_core::assembly::default_penalty(p))
    }
}

fn retain_matching<T: PartialEq + Copy + std::fmt::Display>(series: &mut Vec<Series>, key: &str, wanted: Option<&Vec<T>>, get: impl Fn(&Series) -> Option<T>) -> Result<(), ConfigError> {
    let Some(wanted) = wanted else { return Ok(()) };
    series.retain(|s| get(s).is_some_and(|v| wanted.contains(&v)));
    if series.is_empty() {
        let list: Vec<String> = wanted.iter().map(|v| v.to_string()).collect();
        return Err(ConfigError::Field {
            key: key.into(),
            msg: format!("{} selects no series of this table; use experiment = custom for other values", list.join(",")),
        });
    }
    Ok(())
}

/// Series to run for a config: table presets filtered and overridden, or one custom series.
pub fn resolve_series(cfg: &ExperimentConfig) -> Result<Vec<Series>, ConfigError> {
    match cfg.experiment() {
        Experiment::Table(k) => {
            let mut series = preset(k);
            retain_matching(&mut series, "kappa", cfg.kappa.as_ref(), |s| Some(s.kappa))?;
            retain_matching(&mut series, "p", cfg.p.as_ref(), |s| Some(s.p))?;
            retain_matching(&mut series, "q", cfg.q.as_ref(), |s| s.q)?;
            retain_matching(&mut series, "m2", cfg.m2.as_ref(), |s| Some(s.m2))?;
            for s in &mut series {
                if let Some(levels) = &cfg.levels {
                    s.grids = levels.clone();
                    s.labels = levels.clone();
                }
                if let Some(n) = cfg.coarse_cells {
                    s.coarse_cells = n;
                }
                if let Some(a) = &cfg.algorithm {
                    s.algorithm = a.clone();
                }
                if let Some(b) = cfg.beta {
                    s.beta = b;
                }
            }
            Ok(series)
        }
        Experiment::Custom => {
            let one = |key: &str, v: Option<&Vec<f64>>| -> Result<Option<f64>, ConfigError> {
                match v.map(Vec::as_slice) {
                    None => Ok(None),
                    Some([x]) => Ok(Some(*x)),
                    Some(_) => Err(ConfigError::Field {
                        key: key.into(),
                        msg: "a custom run takes a single value".into(),
                    }),
                }
            };
            let q = one("q", cfg.q.as_ref())?;
            let kappa = match (cfg.kappa1, q, one("kappa", cfg.kappa.as_ref())?) {
                (Some(k1), Some(q), None) => k1 * q,
                (Some(_), None, _) => {
                    return Err(ConfigError::Field {
                        key: "q".into(),
                        msg: "the quadrant problem needs both kappa1 and q".into(),
                    })
                }
                (Some(_), Some(_), Some(_)) => {
                    return Err(ConfigError::Field {
                        key: "kappa".into(),
                        msg: "give kappa or kappa1 with q, not both".into(),
                    })
                }
                (None, _, Some(k)) => k,
                (None, _, None) => {
                    return Err(ConfigError::Field {
                        key: "kappa".into(),
                        msg: "missing".into(),
                    })
                }
            };
            let p = match cfg.p.as_deref() {
                None => 1,
                Some([p]) => *p,
                Some(_) => {
                    return Err(ConfigError::Field {
                        key: "p".into(),
                        msg: "a custom run takes a single value".into(),
                    })
                }
            };
            let m2 = match cfg.m2.as_deref() {
                None => 1,
                Some([m]) => *m,
                Some(_) => {
                    return Err(ConfigError::Field {
                        key: "m2".into(),
                        msg: "a custom run takes a single value".into(),
                    })
                }
            };
            // Custom levels count refinements: L = 0 is a single grid.
            let refinements = cfg.levels.clone().unwrap_or_else(|| vec![2]);
            Ok(vec![Series {
                name: "custom".into(),
                kappa,
                q: cfg.kappa1.and(q),
                p,
                algorithm: cfg.algorithm.clone().unwrap_or_else(|| "fem_fine_cip_coarse".into()),
                m2,
                beta: cfg.beta.unwrap_or(0.0),
                grids: refinements.iter().map(|l| l + 1).collect(),
                coarse_cells: cfg.coarse_cells.unwrap_or_else(|| coarse_cells_for(kappa, p)),
                labels: refinements,
            }])
        }
        Experiment::Fig(_) => unreachable!("figures are not tables"),
    }
}

/// Rejects configs whose largest run exceeds [`SIZE_GUARD`] unknowns.
pub fn check_size_guard(series: &[Series], overridden: bool) -> Result<usize, ConfigError> {
    let largest = series.iter().flat_map(|s| s.grids.iter().map(move |&g| s.fine_dofs(g))).max().unwrap_or(0);
    if largest > SIZE_GUARD && !overridden {
        return Err(ConfigError::Field {
            key: "levels".into(),
            msg: format!("largest run has {largest} unknowns (> {SIZE_GUARD}); pass --override-size-guard to run it anyway"),
        });
    }
    Ok(largest)
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub series: String,
    pub level: usize,
    pub dofs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
    /// `(stage, pass, level, smoother, residual_before, residual_after)` of the first cycle.
    pub trace: Vec<(usize, String, usize, String, f64, f64)>,
    pub wall_time: f64,
}

impl TableRow {
    /// `iter` column: the count, or `>max_iter` when the tolerance was not met.
    pub fn iter_cell(&self, max_iter: usize) -> String {
        if self.converged {
            self.iterations.to_string()
        } else {
            format!(">{max_iter}")
        }
    }
}

/// Finest-level size from which FGMRES keeps only the Arnoldi basis.
const LOW_MEMORY_DOFS: usize = 1_000_000;

/// Runs one entry of a series: builds the hierarchy with `grids` grids, solves with FGMRES and,
/// when `trace` is set, records the stages of one cycle applied to the load vector.
pub fn run_level(series: &Series, settings: &SolverSettings, grids: usize, label: usize, trace: bool) -> helmwave_core::Result<TableRow> {
    let variant: CycleVariant = parse_algorithm(&series.algorithm, series.beta).map_err(helmwave_core::HelmError::InvalidArgument)?;
    let sigma = settings.sigma_for(series.p);
    let problem = match (settings.source, series.q) {
        (SourceKind::Gaussian, Some(q)) => HelmholtzProblem::quadrants(series.kappa / q, q, sigma),
        (SourceKind::Gaussian, None) => HelmholtzProblem::quadrants(series.kappa, 1.0, sigma),
        (SourceKind::Bessel, _) => HelmholtzProblem::bessel(series.kappa, sigma),
    };
    let opts = CycleOptions {
        mu: settings.mu,
        m1: settings.m1,
        m2: series.m2,
        alpha: settings.alpha,
        classical: match settings.classical {
            ClassicalKind::Jacobi => ClassicalSmoother::Jacobi { omega: settings.omega },
            ClassicalKind::GaussSeidel => ClassicalSmoother::GaussSeidel,
        },
        ..CycleOptions::default()
    };
    let krylov = KrylovOptions {
        tol: settings.tol,
        max_iter: settings.max_iter,
    };
    let start = Instant::now();
    let hierarchy = build_hierarchy(2, series.coarse_cells, grids)?;
    let plan = CyclePlan::build(&hierarchy, &problem, series.p, variant, &opts)?;
    let b = assemble_load(hierarchy.finest(), &problem, series.p)?;
    let stages = if trace {
        let zero = vec![Complex64::new(0.0, 0.0); b.len()];
        let (_, stages) = plan.apply_cycle_traced(&b, &zero)?;
        stages.into_iter().map(|s| (s.index, format!("{:?}", s.pass).to_lowercase(), s.level, s.smoother.to_string(), s.residual_before, s.residual_after)).collect()
    } else {
        Vec::new()
    };
    // The cycle is deterministic, so large runs recompute the preconditioned directions
    // instead of keeping a second basis.
    let solve = if b.len() >= LOW_MEMORY_DOFS { fgmres_low_memory } else { fgmres };
    let (_, report) = solve(plan.residual_matrix(), &b, &plan, None, krylov)?;
    Ok(TableRow {
        series: series.name.clone(),
        level: label,
        dofs: b.len(),
        iterations: report.iterations,
        converged: report.converged,
        history: report.relative_residual_history,
        trace: stages,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Resolved parameters of one series, for the manifest.
pub fn series_manifest(s: &Series, settings: &SolverSettings) -> Value {
    let sigma = settings.sigma_for(s.p);
    json!({
        "name": s.name,
        "kappa": s.kappa,
        "q": s.q,
        "p": s.p,
        "algorithm": s.algorithm,
        "beta": s.beta,
        "m1": settings.m1,
        "m2": s.m2,
        "coarse_cells": s.coarse_cells,
        "grids": s.grids,
        "levels": s.labels,
        "fine_dofs": s.grids.iter().map(|&g| s.fine_dofs(g)).collect::<Vec<_>>(),
        "sigma": [sigma.re, sigma.im],
    })
}
