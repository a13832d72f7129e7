//! One-dimensional Local Fourier Analysis of the smoothers and of two- and three-level cycles.

mod amplification;
mod blocks;
mod eigen;
mod sweep;
mod symbols;

pub use amplification::{amplification_experiment, amplification_thetas, AmplificationSmoother, INTERVAL_LENGTH};
pub use blocks::{complementary, frequency_pair, frequency_quad, smoother_block, threelevel_block, twolevel_block, CoarsePenalty, LfaSmoother, SymbolBlock, SymbolParams, Variant};
pub use eigen::{eigenvalues, spectral_radius};
pub use sweep::{smoother_curve, spectral_radius_sweep, theta_samples, SweepPoint, SweepResult, RESONANCE_NUDGE};
pub use symbols::{auto_sigma, optimal_sigma, symbol_a_cip, symbol_a_fem, symbol_a_shifted, symbol_smoother_gs, symbol_smoother_jacobi, symbol_transfer, Stencil};
