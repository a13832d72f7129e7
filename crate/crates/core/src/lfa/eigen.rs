//! Eigenvalues of small dense complex matrices: closed form for 2x2, Hessenberg reduction and
//! shifted QR for larger blocks.

use num_complex::Complex64;

use crate::error::{HelmError, Result};

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let half_tr = (a + d) / 2.0;
    let disc = ((a - d) / 2.0).powi(2) + b * c;
    let root = disc.sqrt();
    [half_tr + root, half_tr - root]
}

/// Eigenvalues of the `n x n` row-major matrix `m`.
pub fn eigenvalues(m: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if m.len() != n * n {
        return Err(HelmError::DimensionMismatch {
            expected: n * n,
            got: m.len(),
        });
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[0]]),
        2 => return Ok(eig2(m[0], m[1], m[2], m[3]).to_vec()),
        _ => {}
    }
    let mut h: Vec<Vec<Complex64>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    hessenberg(&mut h);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iters = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out.push(h[0][0]);
            break;
        }
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let scale = h[k][k].norm() + h[k - 1][k - 1].norm();
            if h[k][k - 1].norm() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
                h[k][k - 1] = zero;
                lo = k;
                break;
            }
        }
        if lo == hi {
            out.push(h[hi][hi]);
            hi -= 1;
            iters = 0;
            continue;
        }
        if lo + 1 == hi {
            out.extend(eig2(h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi]));
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iters = 0;
            continue;
        }
        total += 1;
        iters += 1;
        if total > 200 * n {
            return Err(HelmError::EigenNoConvergence);
        }
        let shift = if iters % 11 == 10 {
            h[hi][hi] + h[hi][hi - 1].norm() * 0.75
        } else {
            let [e1, e2] = eig2(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
            if (e1 - h[hi][hi]).norm() < (e2 - h[hi][hi]).norm() {
                e1
            } else {
                e2
            }
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn hessenberg(a: &mut [Vec<Complex64>]) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[k + 1][k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] += phase * norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }
        // A <- (I - 2 v v^H) A (I - 2 v v^H) on rows / columns k+1..n.
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(q, vq)| vq.conj() * a[k + 1 + q][j]).sum();
            for (q, vq) in v.iter().enumerate() {
                a[k + 1 + q][j] -= 2.0 * vq * dot;
            }
        }
        for row in a.iter_mut() {
            let dot: Complex64 = v.iter().enumerate().map(|(q, vq)| row[k + 1 + q] * vq).sum();
            for (q, vq) in v.iter().enumerate() {
                row[k + 1 + q] -= 2.0 * dot * vq.conj();
            }
        }
    }
}

/// One shifted QR step `H - mu I = QR, H <- RQ + mu I` on the active block `lo..=hi`.
fn qr_step(h: &mut [Vec<Complex64>], lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        h[k][k] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (a, b) = (h[k][k], h[k + 1][k]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (a / r, b / r)
        };
        for j in k..=hi {
            let (x, y) = (h[k][j], h[k + 1][j]);
            h[k][j] = c.conj() * x + s.conj() * y;
            h[k + 1][j] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(lo) {
            let (x, y) = (row[k], row[k + 1]);
            row[k] = x * c + y * s;
            row[k + 1] = -x * s.conj() + y * c.conj();
        }
    }
    for k in lo..=hi {
        h[k][k] += mu;
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &[Complex64], n: usize) -> Result<f64> {
    Ok(eigenvalues(m, n)?.iter().fold(0.0, |r, z| r.max(z.norm())))
}
