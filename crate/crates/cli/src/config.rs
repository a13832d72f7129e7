//! Experiment configuration: flat `key = value` lines or a single JSON object.
//!
//! Every field is validated here, before any grid or matrix is allocated.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use helmwave_core::lfa::{LfaSmoother, Variant};
use helmwave_core::mlprecond::CycleVariant;
use num_complex::Complex64;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{key}: {msg}")]
    Field { key: String, msg: String },
}

fn field_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        key: key.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Table(u8),
    Fig(u8),
    Custom,
}

impl Experiment {
    pub fn is_figure(&self) -> bool {
        matches!(self, Experiment::Fig(_))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Experiment::Table(k) => write!(f, "table{k}"),
            Experiment::Fig(k) => write!(f, "fig{k}"),
            Experiment::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        let num = |rest: &str, max: u8| rest.parse::<u8>().ok().filter(|k| (1..=max).contains(k));
        if s == "custom" {
            return Ok(Experiment::Custom);
        }
        if let Some(k) = s.strip_prefix("table").and_then(|r| num(r, 7)) {
            return Ok(Experiment::Table(k));
        }
        if let Some(k) = s.strip_prefix("fig").and_then(|r| num(r, 5)) {
            return Ok(Experiment::Fig(k));
        }
        Err(format!("unknown experiment {s:?} (expected table1..table7, fig1..fig5 or custom)"))
    }
}

/// Solver variant as named in configs.
pub fn parse_algorithm(s: &str, beta: f64) -> Result<CycleVariant, String> {
    CycleVariant::from_name(s, beta).map_err(|e| match e {
        helmwave_core::HelmError::InvalidArgument(msg) => msg,
        other => other.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalKind {
    Jacobi,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Bessel,
    Gaussian,
}

/// Penalty on the coarser levels of a custom Fourier analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum CoarseSigma {
    Same,
    Auto,
    Given(Vec<Complex64>),
}

/// Accepted keys. Anything else is rejected so that typos do not silently fall back to defaults.
const KEYS: &[&str] = &[
    "experiment", "kappa", "kappa1", "q", "p", "levels", "coarse_cells", "algorithm", "m1", "m2", "sigma", "gamma_e", "beta", "omega", "alpha", "mu", "classical", "tol", "max_iter", "output_path", "source", "t", "variant",
    "lfa_levels", "smoother", "coarse_sigma", "sweeps", "repeats", "samples",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub kappa: Option<Vec<f64>>,
    pub kappa1: Option<f64>,
    pub q: Option<Vec<f64>>,
    pub p: Option<Vec<usize>>,
    pub levels: Option<Vec<usize>>,
    pub coarse_cells: Option<usize>,
    pub algorithm: Option<String>,
    pub m1: Option<usize>,
    pub m2: Option<Vec<usize>>,
    /// Penalty `sigma = i gamma_e`; set from either `sigma` or `gamma_e`.
    pub sigma: Option<Complex64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub mu: Option<f64>,
    pub classical: Option<ClassicalKind>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub output_path: Option<String>,
    pub source: Option<SourceKind>,
    pub t: Option<Vec<f64>>,
    pub variant: Option<Vec<Variant>>,
    pub lfa_levels: Option<usize>,
    pub smoother: Option<LfaSmoother>,
    pub coarse_sigma: Option<CoarseSigma>,
    pub sweeps: Option<usize>,
    pub repeats: Option<usize>,
    pub samples: Option<usize>,
}

type RawMap = BTreeMap<String, String>;

/// Splits the flat format into a key map; `#` starts a comment.
fn parse_flat(text: &str) -> Result<RawMap, ConfigError> {
    let mut map = RawMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').or_else(|| line.split_once(':')).ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            msg: format!("expected `key = value`, got {line:?}"),
        })?;
        let key = k.trim().to_ascii_lowercase();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                msg: format!("duplicate key {key:?}"),
            });
        }
    }
    Ok(map)
}

fn json_scalar(key: &str, v: &Value) -> Result<String, ConfigError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(field_err(key, "expected a string, number or boolean")),
    }
}

fn parse_json(text: &str) -> Result<RawMap, ConfigError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| field_err("<root>", "a JSON config must be an object"))?;
    let mut map = RawMap::new();
    for (k, v) in obj {
        let s = match v {
            Value::Array(items) => items.iter().map(|x| json_scalar(k, x)).collect::<Result<Vec<_>, _>>()?.join(","),
            other => json_scalar(k, other)?,
        };
        map.insert(k.to_ascii_lowercase(), s);
    }
    Ok(map)
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    Complex64::from_str(&compact).map_err(|_| format!("cannot parse {s:?} as a complex number (use e.g. -0.07+0.01i)"))
}

struct Fields {
    map: RawMap,
}

impl Fields {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn one<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key).map(|s| s.parse::<T>().map_err(|e| field_err(key, format!("{e} (got {s:?})")))).transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(s) = self.raw(key) else { return Ok(None) };
        let items: Vec<&str> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
        if items.is_empty() {
            return Err(field_err(key, "empty list"));
        }
        items.iter().map(|x| x.parse::<T>().map_err(|e| field_err(key, format!("{e} (got {x:?})")))).collect::<Result<Vec<_>, _>>().map(Some)
    }
}

impl ExperimentConfig {
    /// Parses either format: text whose first non-blank character is `{` is JSON.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let map = if text.trim_start().starts_with('{') { parse_json(text)? } else { parse_flat(text)? };
        if let Some(bad) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(field_err(bad, "unknown key"));
        }
        let f = Fields { map };

        let sigma = match (f.raw("sigma"), f.raw("gamma_e")) {
            (Some(_), Some(_)) => return Err(field_err("sigma", "give either sigma or gamma_e, not both")),
            (Some(s), None) => Some(parse_complex(s).map_err(|e| field_err("sigma", e))?),
            (None, Some(g)) => Some(parse_complex(g).map_err(|e| field_err("gamma_e", e))? * Complex64::i()),
            (None, None) => None,
        };
        let classical = match f.raw("classical").map(|s| s.to_ascii_lowercase()) {
            None => None,
            Some(s) if s == "jacobi" => Some(ClassicalKind::Jacobi),
            Some(s) if s == "gs" || s == "gauss_seidel" => Some(ClassicalKind::GaussSeidel),
            Some(s) => return Err(field_err("classical", format!("expected jacobi or gs, got {s:?}"))),
        };
        let smoother = match f.raw("smoother").map(|s| s.to_ascii_lowercase()) {
            None => None,
            Some(s) if s == "jacobi" => Some(LfaSmoother::Jacobi),
            Some(s) if s == "gs" || s == "gauss_seidel" => Some(LfaSmoother::GaussSeidel),
            Some(s) => return Err(field_err("smoother", format!("expected jacobi or gs, got {s:?}"))),
        };
        let source = match f.raw("source").map(|s| s.to_ascii_lowercase()) {
            None => None,
            Some(s) if s == "bessel" => Some(SourceKind::Bessel),
            Some(s) if s == "gaussian" => Some(SourceKind::Gaussian),
            Some(s) => return Err(field_err("source", format!("expected bessel or gaussian, got {s:?}"))),
        };
        let coarse_sigma = match f.raw("coarse_sigma") {
            None => None,
            Some(s) if s.eq_ignore_ascii_case("same") => Some(CoarseSigma::Same),
            Some(s) if s.eq_ignore_ascii_case("auto") => Some(CoarseSigma::Auto),
            Some(s) => Some(CoarseSigma::Given(s.split(',').map(parse_complex).collect::<Result<_, _>>().map_err(|e| field_err("coarse_sigma", e))?)),
        };

        let cfg = Self {
            experiment: f.one("experiment")?,
            kappa: f.list("kappa")?,
            kappa1: f.one("kappa1")?,
            q: f.list("q")?,
            p: f.list("p")?,
            levels: f.list("levels")?,
            coarse_cells: f.one("coarse_cells")?,
            algorithm: f.raw("algorithm").map(str::to_string),
            m1: f.one("m1")?,
            m2: f.list("m2")?,
            sigma,
            beta: f.one("beta")?,
            omega: f.one("omega")?,
            alpha: f.one("alpha")?,
            mu: f.one("mu")?,
            classical,
            tol: f.one("tol")?,
            max_iter: f.one("max_iter")?,
            output_path: f.raw("output_path").map(str::to_string),
            source,
            t: f.list("t")?,
            variant: f.list("variant")?,
            lfa_levels: f.one("lfa_levels")?,
            smoother,
            coarse_sigma,
            sweeps: f.one("sweeps")?,
            repeats: f.one("repeats")?,
            samples: f.one("samples")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.expect("validated")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let exp = self.experiment.ok_or_else(|| field_err("experiment", "missing"))?;
        let positive = |key: &str, v: Option<&Vec<f64>>| -> Result<(), ConfigError> {
            match v.and_then(|v| v.iter().find(|x| !(x.is_finite() && **x > 0.0))) {
                Some(bad) => Err(field_err(key, format!("must be positive, got {bad}"))),
                None => Ok(()),
            }
        };
        positive("kappa", self.kappa.as_ref())?;
        positive("t", self.t.as_ref())?;
        if let Some(q) = &self.q {
            if let Some(bad) = q.iter().find(|x| !(x.is_finite() && **x >= 1.0)) {
                return Err(field_err("q", format!("must be >= 1, got {bad}")));
            }
        }
        if let Some(k1) = self.kappa1 {
            if !(k1.is_finite() && k1 > 0.0) {
                return Err(field_err("kappa1", format!("must be positive, got {k1}")));
            }
        }
        if let Some(p) = &self.p {
            if let Some(bad) = p.iter().find(|x| !(1..=2).contains(*x)) {
                return Err(field_err("p", format!("must be 1 or 2, got {bad}")));
            }
        }
        if let Some(levels) = &self.levels {
            let min = if exp == Experiment::Custom { 0 } else { 1 };
            if let Some(bad) = levels.iter().find(|l| **l < min || **l > 12) {
                return Err(field_err("levels", format!("must lie in [{min}, 12], got {bad}")));
            }
        }
        if self.coarse_cells.is_some_and(|n| n == 0 || n > 4096) {
            return Err(field_err("coarse_cells", "must lie in [1, 4096]"));
        }
        if self.m1.is_some_and(|m| m == 0 || m > 1000) {
            return Err(field_err("m1", "must lie in [1, 1000]"));
        }
        if let Some(bad) = self.m2.iter().flatten().find(|m| **m == 0 || **m > 1000) {
            return Err(field_err("m2", format!("must lie in [1, 1000], got {bad}")));
        }
        if let Some(s) = self.sigma {
            if !(s.re.is_finite() && s.im.is_finite()) || s.im < 0.0 {
                return Err(field_err("sigma", format!("needs finite parts and Im(sigma) >= 0, got {s}")));
            }
        }
        if self.beta.is_some_and(|b| !(b.is_finite() && b >= 0.0)) {
            return Err(field_err("beta", "must be >= 0"));
        }
        if self.omega.is_some_and(|w| !(w > 0.0 && w <= 2.0)) {
            return Err(field_err("omega", "must lie in (0, 2]"));
        }
        if self.alpha.is_some_and(|a| !(a.is_finite() && a > 0.0)) {
            return Err(field_err("alpha", "must be positive"));
        }
        if self.mu.is_some_and(|m| !(m > 0.0 && m <= 1.0)) {
            return Err(field_err("mu", "must lie in (0, 1]"));
        }
        if self.tol.is_some_and(|t| !(t > 0.0 && t < 1.0)) {
            return Err(field_err("tol", "must lie in (0, 1)"));
        }
        if self.max_iter.is_some_and(|m| m == 0 || m > 100_000) {
            return Err(field_err("max_iter", "must lie in [1, 100000]"));
        }
        if self.lfa_levels.is_some_and(|l| l != 2 && l != 3) {
            return Err(field_err("lfa_levels", "must be 2 or 3"));
        }
        if self.sweeps.is_some_and(|s| s == 0 || s > 100) {
            return Err(field_err("sweeps", "must lie in [1, 100]"));
        }
        if self.repeats.is_some_and(|s| s == 0 || s > 100) {
            return Err(field_err("repeats", "must lie in [1, 100]"));
        }
        if self.samples.is_some_and(|s| !(2..=1_000_000).contains(&s)) {
            return Err(field_err("samples", "must lie in [2, 1000000]"));
        }
        if let Some(a) = &self.algorithm {
            parse_algorithm(a, 0.0).map_err(|e| field_err("algorithm", e))?;
        }
        if let Some(path) = &self.output_path {
            if path.trim().is_empty() {
                return Err(field_err("output_path", "must not be empty"));
            }
        }
        Ok(())
    }
}
