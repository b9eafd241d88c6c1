//! Harmonic functions of the killed walk (`h₁` in one dimension, `h` in
//! the mixed-drift quadrant case), ladder heights and the potential kernel
//! `U`, the decorrelation transform, and the Lyapunov function `V`.

mod decorrelate;
mod h1;
mod h2d;
mod ladder;
mod lyapunov;

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

pub use decorrelate::{decorrelate, DecorrelationResult};
pub use h1::{h1_estimate, h1_exact_lattice, LatticeH1};
pub use h2d::{h2d_estimate, one_step_residual, HarmonicResidual};
pub use ladder::{ladder_height_sample, potential_kernel_u, LadderSample, PotentialEstimate, DEFAULT_LADDER_HORIZON};
pub use lyapunov::{
    superharmonic_check, uniform_grid, LyapunovRow, LyapunovSpec, RRule, SuperharmonicReport, QUADRATURE_TOLERANCE,
    ROOT_TOLERANCE,
};

/// One-sided or two-sided bound on the systematic error of an estimate:
/// the true value lies in `[value − below, value + above]` up to the
/// statistical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasBound {
    pub below: f64,
    pub above: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateMethod {
    MonteCarlo { horizon: u64, paths: u64, master_seed: u64 },
    LatticeExact { truncation: usize },
}

/// A pointwise value of `h₁` or `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicEstimate {
    /// `[x]` for `h₁`, `[x₁, x₂]` for `h`.
    pub point: Vec<f64>,
    pub value: f64,
    /// Standard error over Monte Carlo paths; zero for exact solves.
    pub stat_error: f64,
    pub truncation_bias_bound: Option<BiasBound>,
    pub method: EstimateMethod,
    /// Fraction of paths alive at the horizon.
    pub censored_fraction: Option<f64>,
    /// Set when the estimate contradicts a known property (e.g. `h < 0`
    /// beyond three standard errors).
    pub violation: Option<String>,
}
