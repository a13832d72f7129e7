use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by mesh construction, assembly, solvers and the Fourier analysis.
#[derive(Debug, Error)]
pub enum HelmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial order {0} is not supported (expected 1 or 2)")]
    UnsupportedOrder(usize),

    #[error("penalty parameter {0} has negative imaginary part")]
    NegativePenalty(Complex64),

    #[error("mesh too large: {0} degrees of freedom overflow the index type")]
    IndexOverflow(u128),

    #[error("level {level} out of range for a hierarchy with {num_levels} levels")]
    LevelOutOfRange { level: usize, num_levels: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("matrix is singular to working precision (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("coarse solve on level {level} failed: {source}")]
    CoarseSolve {
        level: usize,
        #[source]
        source: Box<HelmError>,
    },

    #[error("resonance: {what} symbol vanishes on level {level} at theta = {theta}")]
    Resonance {
        what: &'static str,
        level: usize,
        theta: f64,
    },

    #[error("cycle uses GMRES smoothing on levels {0:?}; its error operator is not linear")]
    NonlinearCycle(Vec<usize>),

    #[error("dense operator of size {size} exceeds the cap {cap}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HelmError>;
