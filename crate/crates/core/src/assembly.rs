//! Complex sparse Helmholtz operators and load vectors.
//!
//! The bilinear form is
//! `(grad u, grad v) + sum_e sigma h_e <[d_n u], [d_n v]>_e - c kappa^2 (u, v) + i kappa <u, v>_boundary`
//! with `c = 1` for the FEM and CIP flavors and `c = 1 + i beta` for the shifted Laplacian. The
//! penalty sum runs over interior facets and is only present in the CIP flavor.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bessel::bessel_j0_j1;
use crate::error::{HelmError, Result};
use crate::fe::{num_local_dofs, AffineElement, Quadrature};
use crate::mesh::{Grid, MeshSpec};
use crate::sparse::{ComplexSparseMatrix, PatternBuilder};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wave-number field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavenumber {
    Constant(f64),
    /// `k1` on the quadrants `x < 0 < y` and `y < 0 < x`, `k2` on the other two.
    Quadrants { k1: f64, k2: f64 },
}

impl Wavenumber {
    pub fn at(&self, x: [f64; 2]) -> f64 {
        match *self {
            Wavenumber::Constant(k) => k,
            Wavenumber::Quadrants { k1, k2 } => {
                if (x[0] < 0.0) != (x[1] < 0.0) {
                    k1
                } else {
                    k2
                }
            }
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Wavenumber::Constant(k) => k,
            Wavenumber::Quadrants { k1, k2 } => k1.max(k2),
        }
    }
}

pub type SourceFn = Arc<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>;

/// Right-hand side data `f` (volume) and `g` (Robin boundary).
#[derive(Clone)]
pub enum Source {
    Zero,
    /// `f = sin(kappa r) / r` with `g` taken from the closed-form Bessel solution.
    BesselExample,
    /// Narrow Gaussian around `center` scaled by the local wave number, `g = 0`.
    GaussianPointSource { center: [f64; 2] },
    Custom { f: SourceFn, g: SourceFn },
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::BesselExample => write!(f, "BesselExample"),
            Source::GaussianPointSource { center } => {
                write!(f, "GaussianPointSource {{ center: {center:?} }}")
            }
            Source::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `d_n u + i kappa u = g`.
    Robin,
    /// Homogeneous Dirichlet; boundary nodes are eliminated.
    Dirichlet,
}

/// Which discrete operator to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flavor {
    Cip,
    Fem,
    /// `c = 1 + i beta`. Negative `beta` is accepted here so a shift can match the sign of
    /// the impedance term.
    ShiftedLaplacian { beta: f64 },
}

#[derive(Debug, Clone)]
pub struct HelmholtzProblem {
    pub kappa: Wavenumber,
    /// Penalty weight `sigma = i gamma_e`.
    pub sigma: Complex64,
    pub source: Source,
    pub boundary: BoundaryCondition,
}

impl HelmholtzProblem {
    pub fn new(kappa: f64, sigma: Complex64) -> Self {
        Self {
            kappa: Wavenumber::Constant(kappa),
            sigma,
            source: Source::Zero,
            boundary: BoundaryCondition::Robin,
        }
    }

    /// Constant wave number, Bessel-solution data.
    pub fn bessel(kappa: f64, sigma: Complex64) -> Self {
        Self {
            source: Source::BesselExample,
            ..Self::new(kappa, sigma)
        }
    }

    /// Piecewise-constant wave number with a Gaussian source at `(-0.25, -0.25)`.
    pub fn quadrants(k1: f64, q: f64, sigma: Complex64) -> Self {
        Self {
            kappa: Wavenumber::Quadrants { k1, k2: q * k1 },
            sigma,
            source: Source::GaussianPointSource {
                center: [-0.25, -0.25],
            },
            boundary: BoundaryCondition::Robin,
        }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryCondition) -> Self {
        self.boundary = boundary;
        self
    }
}

/// Dimensionless 1D stencil coefficients `R` and `S` for `t = kappa h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCoefficients {
    pub t: f64,
    pub sigma: Complex64,
    pub r: Complex64,
    pub s: Complex64,
}

impl StencilCoefficients {
    pub fn new(t: f64, sigma: Complex64) -> Self {
        let t2 = t * t;
        Self {
            t,
            sigma,
            r: -1.0 - 4.0 * sigma - t2 / 6.0,
            s: 1.0 + 3.0 * sigma - t2 / 3.0,
        }
    }

    /// Shifted-Laplacian stencil: `sigma = 0` and `t^2` scaled by `1 + i beta`.
    pub fn shifted(t: f64, beta: f64) -> Self {
        let t2 = Complex64::new(1.0, beta) * t * t;
        Self {
            t,
            sigma: Complex64::new(0.0, 0.0),
            r: -1.0 - t2 / 6.0,
            s: 1.0 - t2 / 3.0,
        }
    }
}

/// Maps grid nodes to unknowns: every node for Robin problems, interior nodes for Dirichlet.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub n_nodes: usize,
    /// `free[node]` is the unknown index, or `u32::MAX` for eliminated nodes.
    pub free: Vec<u32>,
    pub n_free: usize,
}

impl DofLayout {
    pub fn new(grid: &Grid, p: usize, boundary: BoundaryCondition) -> Result<Self> {
        let map = grid.dof_map(p)?;
        let mut free = vec![0u32; map.n_dofs];
        if boundary == BoundaryCondition::Dirichlet {
            for &b in &map.boundary_dofs {
                free[b] = u32::MAX;
            }
        }
        let mut next = 0u32;
        for f in free.iter_mut() {
            if *f != u32::MAX {
                *f = next;
                next += 1;
            }
        }
        Ok(Self {
            n_nodes: map.n_dofs,
            free,
            n_free: next as usize,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.n_free == self.n_nodes
    }

    /// Indices of the kept nodes in increasing order.
    pub fn kept_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes).filter(|&i| self.free[i] != u32::MAX).collect()
    }

    /// Extends a vector of unknowns by zeros on eliminated nodes.
    pub fn expand(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.free
            .iter()
            .map(|&f| {
                if f == u32::MAX {
                    Complex64::new(0.0, 0.0)
                } else {
                    x[f as usize]
                }
            })
            .collect()
    }
}

fn check_order(p: usize) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(HelmError::UnsupportedOrder(p))
    }
}

/// Global dofs of element `k` and its affine map.
fn element_data<'a>(grid: &'a Grid, p: usize, k: usize) -> Result<(&'a [usize], AffineElement)> {
    let map = grid.dof_map(p)?;
    Ok((map.element(k), AffineElement::new(grid.dim, grid.element_coords(k))))
}

/// Physical points and weights (including the facet measure) along a facet.
fn facet_rule(grid: &Grid, vertices: [usize; 2], element: &AffineElement, local: usize, n: usize) -> Vec<([f64; 3], f64)> {
    if grid.dim == 1 {
        let mut lam = [0.0; 3];
        lam[local] = 1.0;
        return vec![(lam, 1.0)];
    }
    let a = grid.vertices[vertices[0]];
    let b = grid.vertices[vertices[1]];
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let rule = Quadrature::interval(n);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| {
            let x = [l[0] * a[0] + l[1] * b[0], l[0] * a[1] + l[1] * b[1]];
            (element.barycentric(x), w * len)
        })
        .collect()
}

fn pattern(grid: &Grid, p: usize, with_penalty: bool) -> Result<ComplexSparseMatrix> {
    let map = grid.dof_map(p)?;
    let mut pb = PatternBuilder::new(map.n_dofs, map.n_dofs);
    for k in 0..grid.num_elements() {
        pb.add_clique(map.element(k));
    }
    if with_penalty {
        let mut buf = Vec::with_capacity(12);
        for f in &grid.interior_facets {
            buf.clear();
            buf.extend_from_slice(map.element(f.elements[0]));
            buf.extend_from_slice(map.element(f.elements[1]));
            pb.add_clique(&buf);
        }
    }
    Ok(pb.finish())
}

/// Standard CIP penalty for order `p`: `sigma = i gamma_e` with `gamma_e = 0.01 + 0.07i` for P1
/// and `0.005 + 0.035i` for P2.
pub fn default_penalty(p: usize) -> Complex64 {
    if p == 1 {
        Complex64::new(-0.07, 0.01)
    } else {
        Complex64::new(-0.035, 0.005)
    }
}

/// Assembles the operator of the given flavor on all grid nodes, then eliminates Dirichlet nodes.
pub fn assemble_matrix(grid: &Grid, problem: &HelmholtzProblem, p: usize, flavor: Flavor) -> Result<ComplexSparseMatrix> {
    check_order(p)?;
    let (penalty, mass_scale) = match flavor {
        Flavor::Cip => {
            if problem.sigma.im < 0.0 {
                return Err(HelmError::NegativePenalty(problem.sigma));
            }
            (problem.sigma, Complex64::new(1.0, 0.0))
        }
        Flavor::Fem => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        Flavor::ShiftedLaplacian { beta } => {
            if !beta.is_finite() {
                return Err(HelmError::InvalidArgument(format!("beta must be finite, got {beta}")));
            }
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, beta))
        }
    };
    let with_penalty = flavor == Flavor::Cip;
    let mut a = pattern(grid, p, with_penalty)?;

    let nloc = num_local_dofs(grid.dim, p);
    let quad = Quadrature::simplex(grid.dim, p + 1);
    let mut vals = [0.0; 6];
    let mut grads = [[0.0; 2]; 6];
    let mut local = vec![Complex64::new(0.0, 0.0); 144];

    for k in 0..grid.num_elements() {
        let (dofs, el) = element_data(grid, p, k)?;
        let kappa = problem.kappa.at(el.centroid());
        let mass_coef = mass_scale * kappa * kappa;
        let mut stiff = [[0.0f64; 6]; 6];
        let mut mass = [[0.0f64; 6]; 6];
        for (lam, w) in quad.points.iter().zip(&quad.weights) {
            el.eval(p, lam, &mut vals, &mut grads);
            let jw = w * el.measure * if grid.dim == 1 { 1.0 } else { 2.0 };
            for i in 0..nloc {
                for j in 0..nloc {
                    stiff[i][j] += jw * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    mass[i][j] += jw * vals[i] * vals[j];
                }
            }
        }
        for i in 0..nloc {
            for j in 0..nloc {
                local[i * nloc + j] = stiff[i][j] - mass_coef * mass[i][j];
            }
        }
        a.add_block(dofs, &local[..nloc * nloc]);
    }

    if with_penalty && penalty != Complex64::new(0.0, 0.0) {
        let map = grid.dof_map(p)?;
        let mut dofs = Vec::with_capacity(12);
        let mut coef = [0.0f64; 12];
        for f in &grid.interior_facets {
            let e0 = AffineElement::new(grid.dim, grid.element_coords(f.elements[0]));
            let e1 = AffineElement::new(grid.dim, grid.element_coords(f.elements[1]));
            dofs.clear();
            dofs.extend_from_slice(map.element(f.elements[0]));
            dofs.extend_from_slice(map.element(f.elements[1]));
            let m = dofs.len();
            local[..m * m].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let rule0 = facet_rule(grid, f.vertices, &e0, f.local[0], p + 1);
            let rule1 = facet_rule(grid, f.vertices, &e1, f.local[1], p + 1);
            for ((lam0, w), (lam1, _)) in rule0.iter().zip(&rule1) {
                e0.eval(p, lam0, &mut vals, &mut grads);
                for i in 0..nloc {
                    coef[i] = grads[i][0] * f.normal[0] + grads[i][1] * f.normal[1];
                }
                e1.eval(p, lam1, &mut vals, &mut grads);
                for i in 0..nloc {
                    coef[nloc + i] = -(grads[i][0] * f.normal[0] + grads[i][1] * f.normal[1]);
                }
                let scale = penalty * f.size * *w;
                for i in 0..m {
                    for j in 0..m {
                        local[i * m + j] += scale * (coef[i] * coef[j]);
                    }
                }
            }
            a.add_block(&dofs, &local[..m * m]);
        }
    }

    if problem.boundary == BoundaryCondition::Robin {
        let map = grid.dof_map(p)?;
        for f in &grid.boundary_facets {
            let el = AffineElement::new(grid.dim, grid.element_coords(f.element));
            let kappa = problem.kappa.at(el.centroid());
            let dofs = map.element(f.element);
            local[..nloc * nloc].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (lam, w) in facet_rule(grid, f.vertices, &el, f.local, p + 1) {
                el.eval(p, &lam, &mut vals, &mut grads);
                for i in 0..nloc {
                    for j in 0..nloc {
                        local[i * nloc + j] += I * kappa * w * vals[i] * vals[j];
                    }
                }
            }
            a.add_block(dofs, &local[..nloc * nloc]);
        }
    }

    let layout = DofLayout::new(grid, p, problem.boundary)?;
    if layout.is_identity() {
        Ok(a)
    } else {
        Ok(a.submatrix(&layout.kept_nodes()))
    }
}

/// Load vector `(f, v) + <g, v>` on the unknowns of the problem.
pub fn assemble_load(grid: &Grid, problem: &HelmholtzProblem, p: usize) -> Result<Vec<Complex64>> {
    check_order(p)?;
    let map = grid.dof_map(p)?;
    let mut b = vec![Complex64::new(0.0, 0.0); map.n_dofs];
    let nloc = num_local_dofs(grid.dim, p);
    // Sources are smooth but not polynomial; use a few extra points.
    let quad = Quadrature::simplex(grid.dim, p + 3);
    let mut vals = [0.0; 6];
    let mut grads = [[0.0; 2]; 6];

    let const_kappa = problem.kappa.max();
    let volume = |x: [f64; 2], kappa: f64| -> Complex64 {
        match &problem.source {
            Source::Zero => Complex64::new(0.0, 0.0),
            Source::BesselExample => Complex64::new(bessel_source(const_kappa, x), 0.0),
            Source::GaussianPointSource { center } => Complex64::new(gaussian_source(x, *center, kappa), 0.0),
            Source::Custom { f, .. } => f(x),
        }
    };

    if !matches!(problem.source, Source::Zero) {
        for k in 0..grid.num_elements() {
            let (dofs, el) = element_data(grid, p, k)?;
            let kappa = problem.kappa.at(el.centroid());
            for (lam, w) in quad.points.iter().zip(&quad.weights) {
                el.eval(p, lam, &mut vals, &mut grads);
                let jw = w * el.measure * if grid.dim == 1 { 1.0 } else { 2.0 };
                let fx = volume(el.point(lam), kappa) * jw;
                for i in 0..nloc {
                    b[dofs[i]] += fx * vals[i];
                }
            }
        }
    }

    let boundary_data = |x: [f64; 2], normal: [f64; 2]| -> Complex64 {
        match &problem.source {
            Source::BesselExample => bessel_robin_data(const_kappa, x, normal),
            Source::Custom { g, .. } => g(x),
            _ => Complex64::new(0.0, 0.0),
        }
    };
    let has_boundary_data = matches!(problem.source, Source::BesselExample | Source::Custom { .. });
    if problem.boundary == BoundaryCondition::Robin && has_boundary_data {
        for f in &grid.boundary_facets {
            let el = AffineElement::new(grid.dim, grid.element_coords(f.element));
            let dofs = map.element(f.element);
            for (lam, w) in facet_rule(grid, f.vertices, &el, f.local, p + 3) {
                el.eval(p, &lam, &mut vals, &mut grads);
                let gx = boundary_data(el.point(&lam), f.normal) * w;
                for i in 0..nloc {
                    b[dofs[i]] += gx * vals[i];
                }
            }
        }
    }

    let layout = DofLayout::new(grid, p, problem.boundary)?;
    if layout.is_identity() {
        Ok(b)
    } else {
        Ok(layout.kept_nodes().into_iter().map(|i| b[i]).collect())
    }
}

/// CIP matrix and load vector.
pub fn assemble_cip(grid: &Grid, problem: &HelmholtzProblem, p: usize) -> Result<(ComplexSparseMatrix, Vec<Complex64>)> {
    Ok((assemble_matrix(grid, problem, p, Flavor::Cip)?, assemble_load(grid, problem, p)?))
}

/// Standard FEM matrix (`sigma = 0`) and load vector.
pub fn assemble_fem(grid: &Grid, problem: &HelmholtzProblem, p: usize) -> Result<(ComplexSparseMatrix, Vec<Complex64>)> {
    Ok((assemble_matrix(grid, problem, p, Flavor::Fem)?, assemble_load(grid, problem, p)?))
}

/// FEM discretization of `-Laplace - (1 + i beta) kappa^2`.
pub fn assemble_shifted_laplacian(grid: &Grid, problem: &HelmholtzProblem, p: usize, beta: f64) -> Result<ComplexSparseMatrix> {
    if !(beta >= 0.0) {
        return Err(HelmError::InvalidArgument(format!("beta must be >= 0, got {beta}")));
    }
    assemble_matrix(grid, problem, p, Flavor::ShiftedLaplacian { beta })
}

/// P1 CIP matrix on `n_cells` uniform cells of an interval with homogeneous Dirichlet
/// conditions: `n_cells - 1` unknowns, wave number `t / h`.
pub fn assemble_dirichlet_1d(n_cells: usize, interval_length: f64, t: f64, sigma: Complex64) -> Result<ComplexSparseMatrix> {
    if n_cells < 4 {
        return Err(HelmError::InvalidArgument(format!(
            "need at least 3 interior nodes, got {}",
            n_cells.saturating_sub(1)
        )));
    }
    let spec = MeshSpec::interval(0.0, interval_length, n_cells, 1);
    let hierarchy = crate::mesh::build_hierarchy_with(&spec)?;
    let grid = hierarchy.finest();
    let problem = HelmholtzProblem::new(t / grid.h, sigma).with_boundary(BoundaryCondition::Dirichlet);
    assemble_matrix(grid, &problem, 1, Flavor::Cip)
}

/// Closed-form solution of the Bessel test problem on the unit square.
pub fn bessel_exact_solution(kappa: f64, point: [f64; 2]) -> Complex64 {
    let r = point[0].hypot(point[1]);
    let (j0r, _) = bessel_j0_j1(kappa * r);
    Complex64::new((kappa * r).cos() / kappa, 0.0) - bessel_constant(kappa) * j0r
}

/// Gradient of [`bessel_exact_solution`].
pub fn bessel_exact_gradient(kappa: f64, point: [f64; 2]) -> [Complex64; 2] {
    let r = point[0].hypot(point[1]);
    if r == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    let (_, j1r) = bessel_j0_j1(kappa * r);
    let du_dr = -(kappa * r).sin() + bessel_constant(kappa) * kappa * j1r;
    [du_dr * (point[0] / r), du_dr * (point[1] / r)]
}

fn bessel_constant(kappa: f64) -> Complex64 {
    let (j0, j1) = bessel_j0_j1(kappa);
    Complex64::from_polar(1.0, kappa) / (kappa * Complex64::new(j0, j1))
}

/// `sin(kappa r) / r`, extended by its limit `kappa` at the origin.
pub fn bessel_source(kappa: f64, point: [f64; 2]) -> f64 {
    let r = point[0].hypot(point[1]);
    if r < 1e-300 {
        kappa
    } else {
        (kappa * r).sin() / r
    }
}

fn bessel_robin_data(kappa: f64, x: [f64; 2], normal: [f64; 2]) -> Complex64 {
    let g = bessel_exact_gradient(kappa, x);
    g[0] * normal[0] + g[1] * normal[1] + I * kappa * bessel_exact_solution(kappa, x)
}

/// `exp(-(4 kappa / pi)^2 |x - center|^2)`.
pub fn gaussian_source(point: [f64; 2], center: [f64; 2], kappa_local: f64) -> f64 {
    let s = 4.0 * kappa_local / PI;
    let d2 = (point[0] - center[0]).powi(2) + (point[1] - center[1]).powi(2);
    (-s * s * d2).exp()
}

/// Nodal interpolant of a function on the unknowns of `grid`.
pub fn interpolate(grid: &Grid, p: usize, boundary: BoundaryCondition, f: impl Fn([f64; 2]) -> Complex64) -> Result<Vec<Complex64>> {
    let map = grid.dof_map(p)?;
    let layout = DofLayout::new(grid, p, boundary)?;
    Ok(layout.kept_nodes().into_iter().map(|i| f(map.coords[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_hierarchy, build_hierarchy_with};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid_1d(n: usize) -> Grid {
        build_hierarchy(1, n, 1).unwrap().levels.remove(0)
    }

    #[test]
    fn one_dimensional_interior_row_is_the_five_point_stencil() {
        let n = 10;
        let g = grid_1d(n);
        let h = g.h;
        for (t, sigma) in [(0.8, c(-0.07, 0.01)), (0.3, c(0.0, 0.5)), (1.7, c(0.2, 0.0))] {
            let a = assemble_matrix(&g, &HelmholtzProblem::new(t / h, sigma), 1, Flavor::Cip).unwrap();
            let st = StencilCoefficients::new(t, sigma);
            let want = [st.sigma, st.r, 2.0 * st.s, st.r, st.sigma];
            for row in 2..n - 1 {
                for (k, w) in want.iter().enumerate() {
                    let got = a.get(row, row + k - 2) * h;
                    assert!((got - w).norm() < 1e-12, "t={t} row={row} k={k}: {got} vs {w}");
                }
                assert_eq!(a.row(row).0.len(), 5);
            }
        }
    }

    #[test]
    fn laplacian_limit() {
        let g = grid_1d(6);
        let a = assemble_matrix(&g, &HelmholtzProblem::new(0.0, c(0.0, 0.0)), 1, Flavor::Cip).unwrap();
        let h = g.h;
        for row in 1..6 {
            assert!((a.get(row, row) * h - 2.0).norm() < 1e-13);
            assert!((a.get(row, row - 1) * h + 1.0).norm() < 1e-13);
            assert!((a.get(row, row + 1) * h + 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_matrix_corner_and_size() {
        let t = 0.8;
        let sigma = c(-0.085, 0.0);
        let a = assemble_dirichlet_1d(2500, 10.0, t, sigma).unwrap();
        assert_eq!(a.nrows(), 2499);
        let h = 10.0 / 2500.0;
        let st = StencilCoefficients::new(t, sigma);
        assert!((a.get(0, 0) * h - (2.0 * st.s - sigma)).norm() < 1e-10);
        assert!((a.get(2498, 2498) * h - (2.0 * st.s - sigma)).norm() < 1e-10);
        assert!((a.get(0, 1) * h - st.r).norm() < 1e-10);
        assert!((a.get(1, 1) * h - 2.0 * st.s).norm() < 1e-10);
        assert_eq!(a.symmetry_defect(), 0.0);
        assert!(assemble_dirichlet_1d(3, 1.0, 0.5, sigma).is_err());
    }

    #[test]
    fn cip_with_zero_penalty_equals_fem() {
        for (dim, n) in [(1, 7), (2, 4)] {
            let g = build_hierarchy(dim, n, 1).unwrap().levels.remove(0);
            for p in 1..=2 {
                let prob = HelmholtzProblem::bessel(9.0, c(0.0, 0.0));
                let (a, fa) = assemble_cip(&g, &prob, p).unwrap();
                let (b, fb) = assemble_fem(&g, &prob, p).unwrap();
                assert_eq!(a.max_abs_diff(&b), Some(0.0));
                assert_eq!(fa, fb);
            }
        }
    }

    #[test]
    fn shifted_laplacian_with_zero_shift_equals_fem() {
        let g = build_hierarchy(2, 3, 1).unwrap().levels.remove(0);
        let prob = HelmholtzProblem::new(7.0, c(-0.07, 0.01));
        for p in 1..=2 {
            let s = assemble_shifted_laplacian(&g, &prob, p, 0.0).unwrap();
            let f = assemble_matrix(&g, &prob, p, Flavor::Fem).unwrap();
            assert_eq!(s.max_abs_diff(&f), Some(0.0));
        }
    }

    #[test]
    fn shifted_stencil_in_one_dimension() {
        let g = build_hierarchy_with(&MeshSpec::interval(0.0, 1.0, 12, 1).periodic())
            .unwrap()
            .levels
            .remove(0);
        let (t, beta) = (0.9, 0.5);
        let a = assemble_shifted_laplacian(&g, &HelmholtzProblem::new(t / g.h, c(0.0, 0.0)), 1, beta).unwrap();
        let st = StencilCoefficients::shifted(t, beta);
        for row in 0..12 {
            assert!((a.get(row, row) * g.h - 2.0 * st.s).norm() < 1e-12);
            assert!((a.get(row, (row + 1) % 12) * g.h - st.r).norm() < 1e-12);
            assert_eq!(a.row(row).0.len(), 3);
        }
    }

    #[test]
    fn rejects_bad_order_and_penalty() {
        let g = grid_1d(4);
        let prob = HelmholtzProblem::new(1.0, c(0.0, -0.1));
        assert!(matches!(assemble_matrix(&g, &prob, 1, Flavor::Cip), Err(HelmError::NegativePenalty(_))));
        assert!(assemble_matrix(&g, &prob, 1, Flavor::Fem).is_ok());
        assert!(matches!(assemble_matrix(&g, &prob, 3, Flavor::Fem), Err(HelmError::UnsupportedOrder(3))));
    }

    /// Exact P1 element matrices for the lower/upper right triangles of width `h`.
    fn hand_p1_2x2(kappa: f64, sigma: Complex64) -> Vec<Vec<Complex64>> {
        let n = 2;
        let h = 0.5;
        let nv = 9;
        let mut a = vec![vec![c(0.0, 0.0); nv]; nv];
        let vid = |i: usize, j: usize| i + 3 * j;
        // Stiffness of a right isosceles triangle with the right angle at local vertex 1 (lower)
        // or 2 (upper), legs of length h: independent of h in 2D.
        let lower_stiff = [[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]];
        let upper_stiff = [[0.5, 0.0, -0.5], [0.0, 0.5, -0.5], [-0.5, -0.5, 1.0]];
        let area = h * h / 2.0;
        let mass = |i: usize, j: usize| if i == j { area / 6.0 } else { area / 12.0 };
        let mut tri_grads = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let lower = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)];
                let upper = [vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)];
                for (tri, st) in [(lower, lower_stiff), (upper, upper_stiff)] {
                    for a_ in 0..3 {
                        for b_ in 0..3 {
                            a[tri[a_]][tri[b_]] += c(st[a_][b_] - kappa * kappa * mass(a_, b_), 0.0);
                        }
                    }
                }
                // Gradients of the hat functions of each triangle.
                tri_grads.push((lower, [[-1.0 / h, 0.0], [1.0 / h, -1.0 / h], [0.0, 1.0 / h]]));
                tri_grads.push((upper, [[0.0, -1.0 / h], [1.0 / h, 0.0], [-1.0 / h, 1.0 / h]]));
            }
        }
        // Robin: each boundary edge of length h contributes i kappa h/6 [2 1; 1 2].
        let mut boundary_edges = Vec::new();
        for i in 0..n {
            boundary_edges.push((vid(i, 0), vid(i + 1, 0)));
            boundary_edges.push((vid(i, n), vid(i + 1, n)));
            boundary_edges.push((vid(0, i), vid(0, i + 1)));
            boundary_edges.push((vid(n, i), vid(n, i + 1)));
        }
        for (u, v) in boundary_edges {
            let m = c(0.0, kappa * h / 6.0);
            a[u][u] += 2.0 * m;
            a[v][v] += 2.0 * m;
            a[u][v] += m;
            a[v][u] += m;
        }
        // Penalty: for every pair of triangles sharing an edge, sigma h_e len [d_n]^2 with
        // constant gradients; h_e = len = edge length.
        for x in 0..tri_grads.len() {
            for y in x + 1..tri_grads.len() {
                let (tx, gx) = &tri_grads[x];
                let (ty, gy) = &tri_grads[y];
                let shared: Vec<usize> = tx.iter().copied().filter(|v| ty.contains(v)).collect();
                if shared.len() != 2 {
                    continue;
                }
                let pa = [(shared[0] % 3) as f64 * h, (shared[0] / 3) as f64 * h];
                let pb = [(shared[1] % 3) as f64 * h, (shared[1] / 3) as f64 * h];
                let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
                let nrm = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                let mut jump = vec![0.0; 9];
                for k in 0..3 {
                    jump[tx[k]] += gx[k][0] * nrm[0] + gx[k][1] * nrm[1];
                    jump[ty[k]] -= gy[k][0] * nrm[0] + gy[k][1] * nrm[1];
                }
                for u in 0..9 {
                    for v in 0..9 {
                        a[u][v] += sigma * len * len * jump[u] * jump[v];
                    }
                }
            }
        }
        a
    }

    #[test]
    fn two_by_two_p1_matches_hand_assembly() {
        let g = build_hierarchy(2, 2, 1).unwrap().levels.remove(0);
        let sigma = c(0.01, 0.07);
        let kappa = 1.0;
        let a = assemble_matrix(&g, &HelmholtzProblem::new(kappa, sigma), 1, Flavor::Cip).unwrap();
        assert_eq!(a.nrows(), 9);
        assert_eq!(a.symmetry_defect(), 0.0);
        let want = hand_p1_2x2(kappa, sigma);
        let got = a.to_dense();
        for i in 0..9 {
            for j in 0..9 {
                assert!((got[i][j] - want[i][j]).norm() < 1e-13, "({i},{j}) {} vs {}", got[i][j], want[i][j]);
            }
        }
        // Stiffness and penalty rows sum to zero: the row sums are the mass and Robin parts.
        let fem0 = assemble_matrix(&g, &HelmholtzProblem::new(0.0, c(0.0, 0.0)), 1, Flavor::Cip).unwrap();
        let ones = vec![c(1.0, 0.0); 9];
        for v in fem0.matvec(&ones) {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn penalty_vanishes_on_global_polynomials() {
        let sigma = c(0.3, 0.7);
        for (dim, n) in [(1, 9), (2, 5)] {
            let g = build_hierarchy(dim, n, 1).unwrap().levels.remove(0);
            for p in 1..=2 {
                let cip = assemble_matrix(&g, &HelmholtzProblem::new(0.0, sigma), p, Flavor::Cip).unwrap();
                let fem = assemble_matrix(&g, &HelmholtzProblem::new(0.0, sigma), p, Flavor::Fem).unwrap();
                let poly = |x: [f64; 2]| -> Complex64 {
                    let lin = 0.3 + 2.0 * x[0] - 1.5 * x[1];
                    let quad = if p == 2 { x[0] * x[0] - 0.7 * x[0] * x[1] + 0.2 * x[1] * x[1] } else { 0.0 };
                    c(lin + quad, 0.0)
                };
                let u = interpolate(&g, p, BoundaryCondition::Robin, poly).unwrap();
                let jump: Vec<Complex64> = cip
                    .matvec(&u)
                    .iter()
                    .zip(fem.matvec(&u))
                    .map(|(a, b)| a - b)
                    .collect();
                let max = jump.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(max < 1e-11, "dim={dim} p={p}: {max}");
            }
        }
    }

    #[test]
    fn p2_mass_and_stiffness_integrate_polynomials_exactly() {
        let g = build_hierarchy(2, 3, 1).unwrap().levels.remove(0);
        // With kappa = 1 and no penalty, u^T (K - M) v over quadratics can be checked against
        // exact integrals: take u = v = 1 => -area; u = x, v = 1 => -(x,1) + 0.
        let prob = HelmholtzProblem::new(1.0, c(0.0, 0.0)).with_boundary(BoundaryCondition::Robin);
        let a = assemble_matrix(&g, &prob, 2, Flavor::Fem).unwrap();
        let ones = interpolate(&g, 2, BoundaryCondition::Robin, |_| c(1.0, 0.0)).unwrap();
        let xx = interpolate(&g, 2, BoundaryCondition::Robin, |x| c(x[0] * x[0], 0.0)).unwrap();
        let av = a.matvec(&xx);
        let form: Complex64 = ones.iter().zip(&av).map(|(u, w)| u * w).sum();
        // -(x^2, 1) + i <x^2, 1>_boundary = -1/12 + i (2 * 1/4 + 2 * 1/12).
        let want = c(-1.0 / 12.0, 2.0 * 0.25 + 2.0 / 12.0);
        assert!((form - want).norm() < 1e-13, "{form}");
        let grad_form: Complex64 = xx.iter().zip(&av).map(|(u, w)| u * w).sum();
        // (grad x^2, grad x^2) - (x^4, 1) + i <x^4, 1> = 4/12 - 1/80 + i (2/16 + 2/80).
        let want = c(1.0 / 3.0 - 1.0 / 80.0, 2.0 / 16.0 + 2.0 / 80.0);
        assert!((grad_form - want).norm() < 1e-13, "{grad_form}");
    }

    #[test]
    fn bessel_solution_satisfies_the_pde() {
        let kappa = 20.0;
        let d = 1e-4;
        let pts = [[0.1, 0.2], [-0.3, 0.05], [0.4, -0.45], [-0.2, -0.33], [0.01, 0.02]];
        for x in pts {
            let u = |p: [f64; 2]| bessel_exact_solution(kappa, p);
            let lap = (u([x[0] + d, x[1]]) + u([x[0] - d, x[1]]) + u([x[0], x[1] + d]) + u([x[0], x[1] - d])
                - 4.0 * u(x))
                / (d * d);
            let res = -lap - kappa * kappa * u(x);
            let f = bessel_source(kappa, x);
            assert!((res - f).norm() < 1e-3 * kappa, "{x:?}: {res} vs {f}");
        }
        let at_zero = bessel_exact_solution(kappa, [0.0, 0.0]);
        assert!((at_zero - (1.0 / kappa - bessel_constant(kappa))).norm() < 1e-15);
        assert_eq!(bessel_source(kappa, [0.0, 0.0]), kappa);
    }

    #[test]
    fn bessel_solution_satisfies_the_robin_condition() {
        // d_n u + i kappa u on x = 0.5 equals the Robin data; check by finite differences.
        let kappa = 30.0;
        let d = 1e-6;
        for y in [-0.4, 0.0, 0.3] {
            let x = [0.5, y];
            let dn = (bessel_exact_solution(kappa, [0.5 + d, y]) - bessel_exact_solution(kappa, [0.5 - d, y])) / (2.0 * d);
            let g = bessel_robin_data(kappa, x, [1.0, 0.0]);
            assert!((dn + I * kappa * bessel_exact_solution(kappa, x) - g).norm() < 1e-6);
        }
    }

    #[test]
    fn gaussian_source_and_quadrant_field() {
        assert_eq!(gaussian_source([-0.25, -0.25], [-0.25, -0.25], 100.0), 1.0);
        let w = Wavenumber::Quadrants { k1: 50.0, k2: 150.0 };
        assert_eq!(w.at([-0.3, 0.2]), 50.0);
        assert_eq!(w.at([0.3, -0.2]), 50.0);
        assert_eq!(w.at([0.3, 0.2]), 150.0);
        assert_eq!(w.at([-0.3, -0.2]), 150.0);
        let p = HelmholtzProblem::quadrants(50.0, 3.0, c(-0.07, 0.01));
        let g = build_hierarchy(2, 4, 1).unwrap().levels.remove(0);
        let b = assemble_load(&g, &p, 1).unwrap();
        assert!(b.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn discrete_solution_converges_to_bessel_solution() {
        let kappa = 10.0;
        let mut errs = Vec::new();
        for n in [16, 32] {
            let g = build_hierarchy(2, n, 1).unwrap().levels.remove(0);
            let prob = HelmholtzProblem::bessel(kappa, c(-0.07, 0.01));
            let (a, b) = assemble_cip(&g, &prob, 1).unwrap();
            let u = crate::direct::BandedLu::factor(&a).unwrap().solve(&b).unwrap();
            let exact = interpolate(&g, 1, BoundaryCondition::Robin, |x| bessel_exact_solution(kappa, x)).unwrap();
            let err = u.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }
}
