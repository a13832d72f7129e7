//! Python module `helmwave`: Fourier analysis of the cycles and 2D multilevel solves.

use helmwave_core::assembly::{assemble_load, assemble_matrix, default_penalty, Flavor, HelmholtzProblem};
use helmwave_core::krylov::{fgmres, KrylovOptions};
use helmwave_core::lfa::{self, CoarsePenalty, LfaSmoother, Stencil, SymbolParams, Variant};
use helmwave_core::mesh::build_hierarchy;
use helmwave_core::mlprecond::{CycleOptions, CyclePlan, CycleVariant};
use helmwave_core::HelmError;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: HelmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn smoother(name: &str) -> PyResult<LfaSmoother> {
    match name.to_ascii_lowercase().as_str() {
        "jacobi" => Ok(LfaSmoother::Jacobi),
        "gs" | "gauss-seidel" | "gauss_seidel" => Ok(LfaSmoother::GaussSeidel),
        other => Err(PyValueError::new_err(format!("unknown smoother {other:?}"))),
    }
}

fn flavor(name: &str, beta: f64) -> PyResult<Flavor> {
    match name.to_ascii_lowercase().as_str() {
        "cip" => Ok(Flavor::Cip),
        "fem" => Ok(Flavor::Fem),
        "sl" | "shifted_laplacian" => Ok(Flavor::ShiftedLaplacian { beta }),
        other => Err(PyValueError::new_err(format!("unknown flavor {other:?} (expected cip, fem or sl)"))),
    }
}

/// Penalty `sigma_o(t)` that makes the 1D CIP symbol exact to fourth order.
#[pyfunction]
fn optimal_sigma(t: f64) -> PyResult<Complex64> {
    lfa::optimal_sigma(t).map_err(err)
}

/// `sigma_o(t)` plus a small positive imaginary shift.
#[pyfunction]
fn auto_sigma(t: f64) -> PyResult<Complex64> {
    lfa::auto_sigma(t).map_err(err)
}

/// `(theta, |S(theta)|)` of one Jacobi or Gauss-Seidel relaxation of the 1D CIP stencil.
#[pyfunction]
#[pyo3(signature = (t, sigma=None, smoother="jacobi", omega=0.6, samples=257))]
fn smoother_curve(t: f64, sigma: Option<Complex64>, smoother: &str, omega: f64, samples: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let sigma = match sigma {
        Some(s) => s,
        None => lfa::optimal_sigma(t).map_err(err)?,
    };
    let curve = lfa::smoother_curve(&Stencil::cip(t, sigma), self::smoother(smoother)?, omega, samples).map_err(err)?;
    Ok(curve.into_iter().unzip())
}

/// Spectral radius of the two- or three-level symbol over the low frequencies.
///
/// `coarse_sigma` is `"auto"`, `"same"` or a list of penalties (next-coarser level first).
#[pyfunction]
#[pyo3(signature = (t, sigma=None, variant="C", levels=2, samples=257, omega=0.6, beta=0.5, coarse_sigma=None, smoother="jacobi", sweeps=1, repeats=1, mu=None))]
#[allow(clippy::too_many_arguments)]
fn lfa_sweep<'py>(
    py: Python<'py>,
    t: f64,
    sigma: Option<Complex64>,
    variant: &str,
    levels: usize,
    samples: usize,
    omega: f64,
    beta: f64,
    coarse_sigma: Option<&Bound<'py, PyAny>>,
    smoother: &str,
    sweeps: usize,
    repeats: usize,
    mu: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let variant: Variant = variant.parse().map_err(err)?;
    let sigma = match (sigma, variant) {
        (Some(s), _) => s,
        (None, Variant::SL) => Complex64::new(0.0, 0.0),
        (None, _) => lfa::auto_sigma(t).map_err(err)?,
    };
    let mut params = SymbolParams::new(t, sigma);
    params.omega = omega;
    params.beta = beta;
    params.smoother = self::smoother(smoother)?;
    params.sweeps = sweeps;
    params.level1_repeats = repeats;
    if let Some(mu) = mu {
        params.mu = [mu; 3];
    }
    params.coarse_penalty = match coarse_sigma {
        None => CoarsePenalty::Auto,
        Some(v) => match v.extract::<String>() {
            Ok(s) if s.eq_ignore_ascii_case("auto") => CoarsePenalty::Auto,
            Ok(s) if s.eq_ignore_ascii_case("same") => CoarsePenalty::Same,
            Ok(s) => return Err(PyValueError::new_err(format!("coarse_sigma must be 'auto', 'same' or a list, got {s:?}"))),
            Err(_) => CoarsePenalty::Given(v.extract::<Vec<Complex64>>()?),
        },
    };
    params.validate().map_err(err)?;
    let sweep = match levels {
        2 => lfa::spectral_radius_sweep(|th, p| lfa::twolevel_block(th, p, variant), &params, samples),
        3 => lfa::spectral_radius_sweep(|th, p| lfa::threelevel_block(th, p, variant), &params, samples),
        _ => return Err(PyValueError::new_err("levels must be 2 or 3")),
    }
    .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("theta0", sweep.points.iter().map(|p| p.theta0).collect::<Vec<_>>())?;
    out.set_item("rho", sweep.points.iter().map(|p| p.rho).collect::<Vec<_>>())?;
    out.set_item("sup", sweep.sup)?;
    Ok(out)
}

/// CSR arrays `(indptr, indices, values)` of a 2D operator on the unit square with `cells`
/// cells per side.
#[pyfunction]
#[pyo3(signature = (cells, kappa, p=1, flavor="cip", sigma=None, beta=0.5))]
fn assemble(cells: usize, kappa: f64, p: usize, flavor: &str, sigma: Option<Complex64>, beta: f64) -> PyResult<(Vec<usize>, Vec<u32>, Vec<Complex64>)> {
    let h = build_hierarchy(2, cells, 1).map_err(err)?;
    let problem = HelmholtzProblem::bessel(kappa, sigma.unwrap_or_else(|| default_penalty(p)));
    let a = assemble_matrix(h.finest(), &problem, p, self::flavor(flavor, beta)?).map_err(err)?;
    Ok((a.indptr().to_vec(), a.indices().to_vec(), a.values().to_vec()))
}

/// Solves the Bessel test problem with FGMRES preconditioned by one multilevel cycle.
///
/// `grids` counts the grids of the hierarchy, the coarsest having `coarse_cells` cells per side.
#[pyfunction]
#[pyo3(signature = (kappa, coarse_cells, grids, p=1, algorithm="fem_fine_cip_coarse", sigma=None, beta=0.5, m1=1, m2=1, tol=1e-6, max_iter=500))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    kappa: f64,
    coarse_cells: usize,
    grids: usize,
    p: usize,
    algorithm: &str,
    sigma: Option<Complex64>,
    beta: f64,
    m1: usize,
    m2: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let variant = CycleVariant::from_name(algorithm, beta).map_err(err)?;
    let problem = HelmholtzProblem::bessel(kappa, sigma.unwrap_or_else(|| default_penalty(p)));
    let opts = CycleOptions { m1, m2, ..CycleOptions::default() };
    let (b_len, report) = py
        .detach(|| -> helmwave_core::Result<_> {
            let hierarchy = build_hierarchy(2, coarse_cells, grids)?;
            let plan = CyclePlan::build(&hierarchy, &problem, p, variant, &opts)?;
            let b = assemble_load(hierarchy.finest(), &problem, p)?;
            let (_, report) = fgmres(plan.residual_matrix(), &b, &plan, None, KrylovOptions { tol, max_iter })?;
            Ok((b.len(), report))
        })
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("dofs", b_len)?;
    out.set_item("iterations", report.iterations)?;
    out.set_item("converged", report.converged)?;
    out.set_item("history", report.relative_residual_history)?;
    out.set_item("wall_time", report.wall_time)?;
    Ok(out)
}

#[pymodule]
fn helmwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(optimal_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(auto_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(smoother_curve, m)?)?;
    m.add_function(wrap_pyfunction!(lfa_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(assemble, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
