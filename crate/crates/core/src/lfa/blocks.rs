//! Two-level (2x2) and three-level (4x4) Fourier representations of the down-only cycle.
//!
//! With prolongation `P` and restriction `P^T`, a fine mode pair `(theta0, theta1)` maps to the
//! coarse mode `2 theta0` through the column `p = [I(theta0), I(theta1)]` (`I` the transfer
//! symbol) and back through `2 p^T`. Together with the `1/h`, `1/(2h)` scalings of the fine and
//! coarse symbols this gives the factor 4 in the coarse correction
//! `I - 4 mu_0 p p^T diag(a_F) / a_c(2 theta0)`; the three-level level-0 factor gets 16.
//!
//! A classical relaxation with `m` sweeps from zero contributes `(1 - S^m) A_s^{-1}`, whose
//! symbol is computed as `c(theta) (1 + S + ... + S^{m-1})` with `c = omega / 2S` (Jacobi) or
//! `1 / (R e^{-i theta} + sigma e^{-2i theta} + 2S)` (Gauss-Seidel), so `a_s(theta) = 0` does not
//! need special treatment.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::eigen::{eigenvalues, spectral_radius};
use super::symbols::{auto_sigma, symbol_transfer, Stencil};
use crate::error::{HelmError, Result};

/// Which operators the analysed method smooths and corrects with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// CIP smoothing and CIP corrections.
    C,
    /// FEM smoothing on the finest level, CIP on coarser levels.
    FC,
    /// Shifted-Laplacian smoothing and corrections.
    SL,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::C => "C",
            Variant::FC => "FC",
            Variant::SL => "SL",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = HelmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(Variant::C),
            "FC" => Ok(Variant::FC),
            "SL" => Ok(Variant::SL),
            _ => Err(HelmError::InvalidArgument(format!("unknown variant {s:?} (expected C, FC or SL)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfaSmoother {
    Jacobi,
    GaussSeidel,
}

/// Penalty on the coarser levels of the analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarsePenalty {
    /// The finest-level `sigma` everywhere.
    Same,
    /// `sigma_o(t_l) + 0.01i` for `t_l < 1`, `sigma_o(t_l) + 0.05i` otherwise.
    Auto,
    /// One value per coarser level, next-coarser first.
    Given(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolParams {
    /// `kappa h` on the finest level.
    pub t: f64,
    /// Finest-level penalty.
    pub sigma: Complex64,
    pub coarse_penalty: CoarsePenalty,
    pub omega: f64,
    pub beta: f64,
    /// Scalings indexed by level, coarsest first: `[mu_0, mu_1, mu_2]`.
    pub mu: [f64; 3],
    pub smoother: LfaSmoother,
    /// Relaxation sweeps per smoothing step.
    pub sweeps: usize,
    /// How many times the intermediate-level factor is applied in the three-level cycle.
    pub level1_repeats: usize,
}

impl SymbolParams {
    pub fn new(t: f64, sigma: Complex64) -> Self {
        Self {
            t,
            sigma,
            coarse_penalty: CoarsePenalty::Same,
            omega: 0.6,
            beta: 0.5,
            mu: [0.5; 3],
            smoother: LfaSmoother::Jacobi,
            sweeps: 1,
            level1_repeats: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(HelmError::InvalidArgument(format!("t must be positive, got {}", self.t)));
        }
        if self.sweeps == 0 || self.level1_repeats == 0 {
            return Err(HelmError::InvalidArgument("sweeps and level1_repeats must be >= 1".into()));
        }
        if self.beta < 0.0 {
            return Err(HelmError::InvalidArgument(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }

    /// Penalty `depth` levels below the finest.
    pub fn sigma_at(&self, depth: usize) -> Result<Complex64> {
        if depth == 0 {
            return Ok(self.sigma);
        }
        match &self.coarse_penalty {
            CoarsePenalty::Same => Ok(self.sigma),
            CoarsePenalty::Auto => auto_sigma(self.t * (1 << depth) as f64),
            CoarsePenalty::Given(v) => v.get(depth - 1).copied().ok_or_else(|| HelmError::InvalidArgument(format!("no coarse penalty given for depth {depth}"))),
        }
    }

    fn t_at(&self, depth: usize) -> f64 {
        self.t * (1 << depth) as f64
    }

    fn smoothing_stencil(&self, variant: Variant, depth: usize) -> Result<Stencil> {
        let t = self.t_at(depth);
        Ok(match (variant, depth) {
            (Variant::SL, _) => Stencil::shifted(t, self.beta),
            (Variant::FC, 0) => Stencil::fem(t),
            _ => Stencil::cip(t, self.sigma_at(depth)?),
        })
    }

    fn coarse_stencil(&self, variant: Variant, depth: usize) -> Result<Stencil> {
        let t = self.t_at(depth);
        Ok(match variant {
            Variant::SL => Stencil::shifted(t, self.beta),
            _ => Stencil::cip(t, self.sigma_at(depth)?),
        })
    }

    fn smoother_symbol(&self, s: &Stencil, theta: f64) -> Result<Complex64> {
        match self.smoother {
            LfaSmoother::Jacobi => s.jacobi(theta, self.omega),
            LfaSmoother::GaussSeidel => s.gauss_seidel(theta),
        }
    }

    /// Symbol of `(I - S^m) A_s^{-1}`, up to the `h` factor.
    fn relaxation_kernel(&self, s: &Stencil, theta: f64) -> Result<Complex64> {
        let c = match self.smoother {
            LfaSmoother::Jacobi => self.omega / (2.0 * s.s),
            LfaSmoother::GaussSeidel => {
                let den = s.r * Complex64::from_polar(1.0, -theta) + s.sigma * Complex64::from_polar(1.0, -2.0 * theta) + 2.0 * s.s;
                1.0 / den
            }
        };
        let sym = self.smoother_symbol(s, theta)?;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for _ in 0..self.sweeps {
            sum += pow;
            pow *= sym;
        }
        Ok(c * sum)
    }
}

/// `sign(x)` with `sign(0) = +1`.
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// The `2h`-harmonic partner `theta0 - sign(theta0) pi`.
pub fn complementary(theta0: f64) -> f64 {
    theta0 - sign(theta0) * PI
}

/// `(theta0, theta1)`.
pub fn frequency_pair(theta0: f64) -> [f64; 2] {
    [theta0, complementary(theta0)]
}

/// Fine frequencies ordered `[00, 01, 10, 11]`, where `theta^{a0} = theta^a / 2` and
/// `theta^{a1} = theta^a / 2 - sign(theta^a / 2) pi` for the pair `(theta^0, theta^1)`.
pub fn frequency_quad(theta0: f64) -> [f64; 4] {
    let [a, b] = frequency_pair(theta0);
    let (ha, hb) = (a / 2.0, b / 2.0);
    [ha, complementary(ha), hb, complementary(hb)]
}

/// Dense Fourier representation of an iteration operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub size: usize,
    /// Row-major entries.
    pub entries: Vec<Complex64>,
    /// The fine frequencies the rows and columns refer to.
    pub frequencies: Vec<f64>,
    pub variant: Option<Variant>,
}

impl SymbolBlock {
    pub fn identity(frequencies: Vec<f64>) -> Self {
        let n = frequencies.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self {
            size: n,
            entries,
            frequencies,
            variant: None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.size + j]
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.entries, self.size)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.entries, self.size)
    }

    fn left_mul(&mut self, m: &[Complex64]) {
        let n = self.size;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = m[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * self.entries[k * n + j];
                }
            }
        }
        self.entries = out;
    }
}

fn check_coarse(a: Complex64, t: f64, level: usize, theta0: f64) -> Result<Complex64> {
    if a.norm() <= 1e-13 * (1.0 + t * t) {
        return Err(HelmError::Resonance {
            what: "coarse operator",
            level,
            theta: theta0,
        });
    }
    Ok(a)
}

/// `diag(1 - mu (1 - S^m) a_F / a_s)` on the given fine frequencies.
fn smoothing_factor(params: &SymbolParams, variant: Variant, thetas: &[f64], a_f: &[Complex64], mu: f64) -> Result<Vec<Complex64>> {
    let n = thetas.len();
    let s = params.smoothing_stencil(variant, 0)?;
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = 1.0 - mu * params.relaxation_kernel(&s, thetas[i])? * a_f[i];
    }
    Ok(m)
}

/// 2x2 block of the down-only two-level cycle at `theta0`: coarse correction first, then smoothing.
pub fn twolevel_block(theta0: f64, params: &SymbolParams, variant: Variant) -> Result<SymbolBlock> {
    params.validate()?;
    let thetas = frequency_pair(theta0);
    let fem = Stencil::fem(params.t);
    let a_f: Vec<Complex64> = thetas.iter().map(|&th| fem.symbol(th)).collect();
    let a_c = params.coarse_stencil(variant, 1)?.symbol(2.0 * theta0);
    let a_c = check_coarse(a_c, params.t_at(1), 0, theta0)?;
    let p: Vec<f64> = thetas.iter().map(|&th| symbol_transfer(th)).collect();

    let mut block = SymbolBlock::identity(thetas.to_vec());
    block.variant = Some(variant);
    for i in 0..2 {
        for j in 0..2 {
            block.entries[i * 2 + j] -= 4.0 * params.mu[0] * p[i] * p[j] * a_f[j] / a_c;
        }
    }
    block.left_mul(&smoothing_factor(params, variant, &thetas, &a_f, params.mu[1])?);
    Ok(block)
}

/// 4x4 block of the down-only three-level cycle at the intermediate-level frequency `theta0`.
pub fn threelevel_block(theta0: f64, params: &SymbolParams, variant: Variant) -> Result<SymbolBlock> {
    params.validate()?;
    let pair = frequency_pair(theta0);
    let quad = frequency_quad(theta0);
    let fem = Stencil::fem(params.t);
    let a_f: Vec<Complex64> = quad.iter().map(|&th| fem.symbol(th)).collect();

    // q[i][a]: transfer from intermediate frequency a to fine frequency i.
    let mut q = [[0.0f64; 2]; 4];
    for a in 0..2 {
        for b in 0..2 {
            q[2 * a + b][a] = symbol_transfer(quad[2 * a + b]);
        }
    }
    let p = [symbol_transfer(pair[0]), symbol_transfer(pair[1])];
    let col: Vec<f64> = (0..4).map(|i| q[i][0] * p[0] + q[i][1] * p[1]).collect();

    let a0 = params.coarse_stencil(variant, 2)?.symbol(2.0 * theta0);
    let a0 = check_coarse(a0, params.t_at(2), 0, theta0)?;
    let mut block = SymbolBlock::identity(quad.to_vec());
    block.variant = Some(variant);
    for i in 0..4 {
        for j in 0..4 {
            block.entries[i * 4 + j] -= 16.0 * params.mu[0] * col[i] * col[j] * a_f[j] / a0;
        }
    }

    let s1 = params.smoothing_stencil(variant, 1)?;
    let k1 = [params.relaxation_kernel(&s1, pair[0])?, params.relaxation_kernel(&s1, pair[1])?];
    let mut level1 = vec![Complex64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            let qkq: Complex64 = (0..2).map(|a| q[i][a] * k1[a] * q[j][a]).sum();
            let delta = if i == j { 1.0 } else { 0.0 };
            level1[i * 4 + j] = delta - 4.0 * params.mu[1] * qkq * a_f[j];
        }
    }
    for _ in 0..params.level1_repeats {
        block.left_mul(&level1);
    }
    block.left_mul(&smoothing_factor(params, variant, &quad, &a_f, params.mu[2])?);
    Ok(block)
}

/// Diagonal 2x2 block of the finest-level relaxation alone.
pub fn smoother_block(theta0: f64, params: &SymbolParams, variant: Variant) -> Result<SymbolBlock> {
    params.validate()?;
    let thetas = frequency_pair(theta0);
    let s = params.smoothing_stencil(variant, 0)?;
    let mut block = SymbolBlock::identity(thetas.to_vec());
    block.variant = Some(variant);
    for i in 0..2 {
        block.entries[i * 3] = params.smoother_symbol(&s, thetas[i])?.powi(params.sweeps as i32);
    }
    Ok(block)
}
