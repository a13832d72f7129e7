//! Nested uniform grids on an interval (1D) or a square (2D).
//!
//! 2D grids split every square cell along its lower-left to upper-right diagonal, so the
//! Lagrange nodes of order `p` form a `(p n + 1)^2` lattice. Degrees of freedom are numbered
//! row-major over that lattice, which is also the Gauss-Seidel sweep order.

use std::fmt::Write as _;

use crate::error::{HelmError, Result};

/// A facet shared by two elements: an interior vertex in 1D, an edge in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorFacet {
    /// Global vertices of the facet (both equal in 1D).
    pub vertices: [usize; 2],
    /// Adjacent elements, lower index first.
    pub elements: [usize; 2],
    /// Local facet number inside each adjacent element.
    pub local: [usize; 2],
    /// Unit normal pointing from `elements[0]` into `elements[1]`.
    pub normal: [f64; 2],
    /// Facet diameter `h_e` used to weight the penalty term.
    pub size: f64,
    /// Integration measure (edge length in 2D, 1 in 1D).
    pub measure: f64,
}

/// A facet on the domain boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 2],
    pub element: usize,
    pub local: usize,
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub measure: f64,
}

/// Global numbering of the order-`p` Lagrange nodes.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub p: usize,
    pub n_dofs: usize,
    per_element: usize,
    element_dofs: Vec<usize>,
    /// Physical coordinates of every node.
    pub coords: Vec<[f64; 2]>,
    /// Nodes lying on the boundary (empty for periodic grids).
    pub boundary_dofs: Vec<usize>,
}

impl DofMap {
    pub fn element(&self, k: usize) -> &[usize] {
        &self.element_dofs[k * self.per_element..(k + 1) * self.per_element]
    }

    pub fn dofs_per_element(&self) -> usize {
        self.per_element
    }
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    /// Cells per side.
    pub cells: usize,
    /// Cell width. The mesh size in `kappa h / p` is [`Grid::diameter`].
    pub h: f64,
    /// Lower-left corner (1D: left endpoint) and side length.
    pub origin: [f64; 2],
    pub length: f64,
    pub periodic: bool,
    pub vertices: Vec<[f64; 2]>,
    element_vertices: Vec<usize>,
    pub interior_facets: Vec<InteriorFacet>,
    pub boundary_facets: Vec<BoundaryFacet>,
    dof_maps: [DofMap; 2],
}

impl Grid {
    pub fn num_elements(&self) -> usize {
        self.element_vertices.len() / (self.dim + 1)
    }

    /// Vertex indices of element `k`, counterclockwise in 2D, left to right in 1D.
    pub fn element(&self, k: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.element_vertices[k * nv..(k + 1) * nv]
    }

    /// Vertex coordinates of element `k`, unwrapped across the period in 1D.
    pub fn element_coords(&self, k: usize) -> [[f64; 2]; 3] {
        let e = self.element(k);
        let mut out = [[0.0; 2]; 3];
        for (i, &v) in e.iter().enumerate() {
            out[i] = self.vertices[v];
        }
        if self.dim == 1 && self.periodic && out[1][0] <= out[0][0] {
            out[1][0] += self.length;
        }
        out
    }

    pub fn dof_map(&self, p: usize) -> Result<&DofMap> {
        match p {
            1 | 2 => Ok(&self.dof_maps[p - 1]),
            _ => Err(HelmError::UnsupportedOrder(p)),
        }
    }

    pub fn n_dofs(&self, p: usize) -> Result<usize> {
        Ok(self.dof_map(p)?.n_dofs)
    }

    /// Largest element diameter.
    pub fn diameter(&self) -> f64 {
        if self.dim == 1 {
            self.h
        } else {
            self.h * std::f64::consts::SQRT_2
        }
    }

    /// Total number of facets (vertices in 1D count as facets).
    pub fn num_facets(&self) -> usize {
        self.interior_facets.len() + self.boundary_facets.len()
    }

    /// Plain-text dump: one vertex per line (`index x [y]`), then one element per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vertices {}", self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if self.dim == 1 {
                let _ = writeln!(out, "{i} {}", v[0]);
            } else {
                let _ = writeln!(out, "{i} {} {}", v[0], v[1]);
            }
        }
        let _ = writeln!(out, "# elements {}", self.num_elements());
        for k in 0..self.num_elements() {
            let verts: Vec<String> = self.element(k).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{k} {}", verts.join(" "));
        }
        out
    }
}

/// Interior and boundary facets of a grid.
pub fn edge_sets(grid: &Grid) -> (&[InteriorFacet], &[BoundaryFacet]) {
    (&grid.interior_facets, &grid.boundary_facets)
}

/// Geometry of the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub dim: usize,
    pub coarse_cells: usize,
    pub num_levels: usize,
    pub origin: [f64; 2],
    pub length: f64,
    /// Only meaningful in 1D.
    pub periodic: bool,
}

impl MeshSpec {
    /// Unit interval `(0, 1)` in 1D, unit square centered at the origin in 2D.
    pub fn new(dim: usize, coarse_cells: usize, num_levels: usize) -> Self {
        let origin = if dim == 2 { [-0.5, -0.5] } else { [0.0, 0.0] };
        Self {
            dim,
            coarse_cells,
            num_levels,
            origin,
            length: 1.0,
            periodic: false,
        }
    }

    pub fn interval(origin: f64, length: f64, coarse_cells: usize, num_levels: usize) -> Self {
        Self {
            dim: 1,
            coarse_cells,
            num_levels,
            origin: [origin, 0.0],
            length,
            periodic: false,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }
}

/// Nested grids `T_0 ⊂ ... ⊂ T_L`, each a uniform refinement of the previous one.
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    pub dim: usize,
    pub levels: Vec<Grid>,
}

impl GridHierarchy {
    pub fn finest(&self) -> &Grid {
        self.levels.last().unwrap()
    }

    pub fn coarsest(&self) -> &Grid {
        &self.levels[0]
    }

    /// Index of the finest level, `L`.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> Result<&Grid> {
        self.levels.get(l).ok_or(HelmError::LevelOutOfRange {
            level: l,
            num_levels: self.levels.len(),
        })
    }
}

/// Builds `num_levels` nested grids starting from `coarse_cells_per_side` cells.
pub fn build_hierarchy(
    dimension: usize,
    coarse_cells_per_side: usize,
    num_levels: usize,
) -> Result<GridHierarchy> {
    build_hierarchy_with(&MeshSpec::new(dimension, coarse_cells_per_side, num_levels))
}

pub fn build_hierarchy_with(spec: &MeshSpec) -> Result<GridHierarchy> {
    if spec.dim != 1 && spec.dim != 2 {
        return Err(HelmError::InvalidArgument(format!(
            "dimension must be 1 or 2, got {}",
            spec.dim
        )));
    }
    if spec.coarse_cells == 0 {
        return Err(HelmError::InvalidArgument("coarse_cells_per_side must be >= 1".into()));
    }
    if spec.num_levels == 0 {
        return Err(HelmError::InvalidArgument("num_levels must be >= 1".into()));
    }
    if !(spec.length > 0.0) {
        return Err(HelmError::InvalidArgument("domain length must be positive".into()));
    }
    if spec.periodic && spec.dim != 1 {
        return Err(HelmError::InvalidArgument("periodic grids are 1D only".into()));
    }
    // The finest P2 lattice has (2n+1)^d nodes; it must fit the u32 column index.
    let fine_cells = u32::try_from(spec.num_levels - 1)
        .ok()
        .and_then(|s| 1u128.checked_shl(s))
        .and_then(|f| f.checked_mul(spec.coarse_cells as u128));
    let fine_dofs = fine_cells
        .and_then(|n| n.checked_mul(2))
        .and_then(|n| n.checked_add(1))
        .and_then(|n| n.checked_pow(spec.dim as u32));
    match fine_dofs {
        Some(d) if d <= u32::MAX as u128 => {}
        Some(d) => return Err(HelmError::IndexOverflow(d)),
        None => return Err(HelmError::IndexOverflow(u128::MAX)),
    }
    if spec.periodic && spec.coarse_cells < 3 {
        return Err(HelmError::InvalidArgument(
            "periodic grids need at least 3 cells".into(),
        ));
    }

    let levels = (0..spec.num_levels)
        .map(|l| {
            let n = spec.coarse_cells << l;
            match spec.dim {
                1 => build_grid_1d(spec.origin[0], spec.length, n, spec.periodic),
                _ => build_grid_2d(spec.origin, spec.length, n),
            }
        })
        .collect();
    Ok(GridHierarchy {
        dim: spec.dim,
        levels,
    })
}

fn lattice_coord(origin: f64, length: f64, i: usize, n: usize) -> f64 {
    origin + length * i as f64 / n as f64
}

fn build_grid_1d(origin: f64, length: f64, n: usize, periodic: bool) -> Grid {
    let h = length / n as f64;
    let nv = if periodic { n } else { n + 1 };
    let vertices: Vec<[f64; 2]> = (0..nv)
        .map(|i| [lattice_coord(origin, length, i, n), 0.0])
        .collect();
    let mut element_vertices = Vec::with_capacity(2 * n);
    for k in 0..n {
        element_vertices.push(k);
        element_vertices.push((k + 1) % nv);
    }

    // Facet at vertex v sits between element v-1 (on its right end) and element v (left end).
    let mut interior_facets = Vec::new();
    let mut boundary_facets = Vec::new();
    for v in 0..nv {
        let left = if v == 0 {
            periodic.then_some(n - 1)
        } else {
            Some(v - 1)
        };
        let right = (v < n).then_some(v);
        match (left, right) {
            (Some(a), Some(b)) => {
                // Lower element first; the normal is the outward normal of that element.
                let (elements, local, normal) = if a < b {
                    ([a, b], [1, 0], [1.0, 0.0])
                } else {
                    ([b, a], [0, 1], [-1.0, 0.0])
                };
                interior_facets.push(InteriorFacet {
                    vertices: [v, v],
                    elements,
                    local,
                    normal,
                    size: h,
                    measure: 1.0,
                });
            }
            (None, Some(b)) => boundary_facets.push(BoundaryFacet {
                vertices: [v, v],
                element: b,
                local: 0,
                normal: [-1.0, 0.0],
                measure: 1.0,
            }),
            (Some(a), None) => boundary_facets.push(BoundaryFacet {
                vertices: [v, v],
                element: a,
                local: 1,
                normal: [1.0, 0.0],
                measure: 1.0,
            }),
            (None, None) => unreachable!(),
        }
    }

    let p1 = {
        let element_dofs = element_vertices.clone();
        DofMap {
            p: 1,
            n_dofs: nv,
            per_element: 2,
            element_dofs,
            coords: vertices.clone(),
            boundary_dofs: if periodic { vec![] } else { vec![0, n] },
        }
    };
    let p2 = {
        let nd = if periodic { 2 * n } else { 2 * n + 1 };
        let mut element_dofs = Vec::with_capacity(3 * n);
        for k in 0..n {
            element_dofs.extend_from_slice(&[2 * k, (2 * k + 2) % nd, 2 * k + 1]);
        }
        DofMap {
            p: 2,
            n_dofs: nd,
            per_element: 3,
            element_dofs,
            coords: (0..nd)
                .map(|i| [lattice_coord(origin, length, i, 2 * n), 0.0])
                .collect(),
            boundary_dofs: if periodic { vec![] } else { vec![0, 2 * n] },
        }
    };

    Grid {
        dim: 1,
        cells: n,
        h,
        origin: [origin, 0.0],
        length,
        periodic,
        vertices,
        element_vertices,
        interior_facets,
        boundary_facets,
        dof_maps: [p1, p2],
    }
}

fn build_grid_2d(origin: [f64; 2], length: f64, n: usize) -> Grid {
    let h = length / n as f64;
    let nv1 = n + 1;
    let vid = |i: usize, j: usize| i + j * nv1;
    let mut vertices = Vec::with_capacity(nv1 * nv1);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([
                lattice_coord(origin[0], length, i, n),
                lattice_coord(origin[1], length, j, n),
            ]);
        }
    }

    // Cell (i, j) -> lower triangle 2c, upper triangle 2c + 1, both counterclockwise.
    let mut element_vertices = Vec::with_capacity(6 * n * n);
    let mut lattice_vertices: Vec<[(usize, usize); 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let lower = [(i, j), (i + 1, j), (i + 1, j + 1)];
            let upper = [(i, j), (i + 1, j + 1), (i, j + 1)];
            for tri in [lower, upper] {
                for &(a, b) in &tri {
                    element_vertices.push(vid(a, b));
                }
                lattice_vertices.push(tri);
            }
        }
    }

    // Edges: sort (min vertex, max vertex, element, local) and pair equal keys.
    let n_el = lattice_vertices.len();
    let mut half_edges: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * n_el);
    for k in 0..n_el {
        let e = &element_vertices[3 * k..3 * k + 3];
        for loc in 0..3 {
            let (a, b) = (e[loc], e[(loc + 1) % 3]);
            half_edges.push((a.min(b), a.max(b), k, loc));
        }
    }
    half_edges.sort_unstable();

    let outward = |k: usize, loc: usize| -> ([f64; 2], f64) {
        let e = &element_vertices[3 * k..3 * k + 3];
        let a = vertices[e[loc]];
        let b = vertices[e[(loc + 1) % 3]];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        ([dy / len, -dx / len], len)
    };

    let mut interior_facets = Vec::new();
    let mut boundary_facets = Vec::new();
    let mut idx = 0;
    while idx < half_edges.len() {
        let (a, b, k, loc) = half_edges[idx];
        if idx + 1 < half_edges.len() && half_edges[idx + 1].0 == a && half_edges[idx + 1].1 == b {
            let (_, _, k2, loc2) = half_edges[idx + 1];
            // Sorting on the element index already puts the lower element first.
            let (normal, len) = outward(k, loc);
            interior_facets.push(InteriorFacet {
                vertices: [a, b],
                elements: [k, k2],
                local: [loc, loc2],
                normal,
                size: len,
                measure: len,
            });
            idx += 2;
        } else {
            let (normal, len) = outward(k, loc);
            boundary_facets.push(BoundaryFacet {
                vertices: [a, b],
                element: k,
                local: loc,
                normal,
                measure: len,
            });
            idx += 1;
        }
    }

    let dof_maps = [1usize, 2].map(|p| {
        let m = p * n;
        let stride = m + 1;
        let mut element_dofs = Vec::with_capacity(n_el * (p + 1) * (p + 2) / 2);
        for tri in &lattice_vertices {
            let node = |(i, j): (usize, usize)| p * i + p * j * stride;
            for &v in tri {
                element_dofs.push(node(v));
            }
            if p == 2 {
                // Edge midpoints in local edge order (v0 v1), (v1 v2), (v2 v0).
                for loc in 0..3 {
                    let (a, b) = (tri[loc], tri[(loc + 1) % 3]);
                    element_dofs.push((a.0 + b.0) + (a.1 + b.1) * stride);
                }
            }
        }
        let mut coords = Vec::with_capacity(stride * stride);
        let mut boundary_dofs = Vec::new();
        for j in 0..=m {
            for i in 0..=m {
                coords.push([
                    lattice_coord(origin[0], length, i, m),
                    lattice_coord(origin[1], length, j, m),
                ]);
                if i == 0 || j == 0 || i == m || j == m {
                    boundary_dofs.push(i + j * stride);
                }
            }
        }
        DofMap {
            p,
            n_dofs: stride * stride,
            per_element: (p + 1) * (p + 2) / 2,
            element_dofs,
            coords,
            boundary_dofs,
        }
    });

    Grid {
        dim: 2,
        cells: n,
        h,
        origin,
        length,
        periodic: false,
        vertices,
        element_vertices,
        interior_facets,
        boundary_facets,
        dof_maps,
    }
}
