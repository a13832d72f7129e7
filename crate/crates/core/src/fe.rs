//! Lagrange shape functions on simplices and the quadrature rules used by assembly.
//!
//! Shape functions are written in barycentric coordinates so the same code serves intervals
//! (two barycentrics) and triangles (three). Local node order: vertices first, then edge
//! midpoints in local edge order `(v0 v1), (v1 v2), (v2 v0)`; the 1D P2 midpoint is local node 2.

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Quadrature rule on the reference simplex: barycentric points and weights summing to the
/// reference measure (1 for the interval, 1/2 for the triangle).
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Gauss rule exact for polynomials of degree `2n - 1` on the unit interval.
    pub fn interval(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|&s| [1.0 - s, s, 0.0]).collect(),
            weights: w,
        }
    }

    /// Collapsed tensor Gauss rule on the reference triangle, exact for degree `2n - 2`.
    pub fn triangle(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&a, &wa) in x.iter().zip(&w) {
            for (&b, &wb) in x.iter().zip(&w) {
                let xi = a;
                let eta = b * (1.0 - a);
                points.push([1.0 - xi - eta, xi, eta]);
                weights.push(wa * wb * (1.0 - a));
            }
        }
        Self { points, weights }
    }

    pub fn simplex(dim: usize, n: usize) -> Self {
        if dim == 1 {
            Self::interval(n)
        } else {
            Self::triangle(n)
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn num_local_dofs(dim: usize, p: usize) -> usize {
    match dim {
        1 => p + 1,
        _ => (p + 1) * (p + 2) / 2,
    }
}

/// Values and barycentric derivatives `d phi_i / d lambda_k` of the local basis.
pub fn shape_bary(dim: usize, p: usize, lam: &[f64; 3], vals: &mut [f64], dlam: &mut [[f64; 3]]) {
    let nb = dim + 1;
    for d in dlam.iter_mut() {
        *d = [0.0; 3];
    }
    if p == 1 {
        for i in 0..nb {
            vals[i] = lam[i];
            dlam[i][i] = 1.0;
        }
        return;
    }
    for i in 0..nb {
        vals[i] = lam[i] * (2.0 * lam[i] - 1.0);
        dlam[i][i] = 4.0 * lam[i] - 1.0;
    }
    if dim == 1 {
        vals[2] = 4.0 * lam[0] * lam[1];
        dlam[2][0] = 4.0 * lam[1];
        dlam[2][1] = 4.0 * lam[0];
    } else {
        for e in 0..3 {
            let (a, b) = (e, (e + 1) % 3);
            vals[3 + e] = 4.0 * lam[a] * lam[b];
            dlam[3 + e][a] = 4.0 * lam[b];
            dlam[3 + e][b] = 4.0 * lam[a];
        }
    }
}

/// Affine map from the reference simplex to a physical element.
#[derive(Debug, Clone)]
pub struct AffineElement {
    pub dim: usize,
    pub vertices: [[f64; 2]; 3],
    /// Physical gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 2]; 3],
    /// Length (1D) or area (2D).
    pub measure: f64,
}

impl AffineElement {
    pub fn new(dim: usize, vertices: [[f64; 2]; 3]) -> Self {
        if dim == 1 {
            let len = vertices[1][0] - vertices[0][0];
            return Self {
                dim,
                vertices,
                grad_bary: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
                measure: len.abs(),
            };
        }
        let [a, b, c] = vertices;
        let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        // Rows of the inverse Jacobian are the gradients of lambda_1 and lambda_2.
        let g1 = [e2[1] / det, -e2[0] / det];
        let g2 = [-e1[1] / det, e1[0] / det];
        Self {
            dim,
            vertices,
            grad_bary: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
            measure: 0.5 * det.abs(),
        }
    }

    pub fn point(&self, lam: &[f64; 3]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for k in 0..=self.dim {
            x[0] += lam[k] * self.vertices[k][0];
            x[1] += lam[k] * self.vertices[k][1];
        }
        x
    }

    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let a = self.vertices[0];
        let d = [x[0] - a[0], x[1] - a[1]];
        let mut lam = [0.0; 3];
        for k in 1..=self.dim {
            lam[k] = self.grad_bary[k][0] * d[0] + self.grad_bary[k][1] * d[1];
        }
        lam[0] = 1.0 - lam[1..=self.dim].iter().sum::<f64>();
        lam
    }

    pub fn centroid(&self) -> [f64; 2] {
        let w = 1.0 / (self.dim + 1) as f64;
        self.point(&[w, w, if self.dim == 2 { w } else { 0.0 }])
    }

    /// Values and physical gradients of the order-`p` basis at barycentric point `lam`.
    pub fn eval(&self, p: usize, lam: &[f64; 3], vals: &mut [f64], grads: &mut [[f64; 2]]) {
        let nloc = num_local_dofs(self.dim, p);
        let mut dlam = [[0.0; 3]; 6];
        shape_bary(self.dim, p, lam, vals, &mut dlam[..nloc]);
        for i in 0..nloc {
            let mut g = [0.0; 2];
            for k in 0..=self.dim {
                g[0] += dlam[i][k] * self.grad_bary[k][0];
                g[1] += dlam[i][k] * self.grad_bary[k][1];
            }
            grads[i] = g;
        }
    }
}
