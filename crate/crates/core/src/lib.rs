//! Simulation and numerical analysis for two-dimensional Lindley
//! (queueing) processes and random-walk exit times from the positive
//! quadrant.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation driven by explicit random streams; IO, configuration and
//! the parallel driver live in the `lindley2d` companion crate.
//!
//! Module map:
//! - [`model`]: increment laws, exact moments, standing assumptions, RNG streams.
//! - [`simulate`]: Lindley, reflected and free walks, exit times, duality.
//! - [`classify`]: recurrence regime and tail exponent prediction.
//! - [`harmonic`]: `h₁`, the 2-D harmonic function `h`, ladder heights,
//!   decorrelation and the Lyapunov function `V`.
//! - [`estimate`]: survival curves, exact lattice tails, exponent fits,
//!   occupation series.
//! - [`chunk`]: deterministic chunked execution of per-path experiments.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chunk;
pub mod classify;
pub mod error;
pub mod estimate;
pub mod harmonic;
pub mod model;
pub mod simulate;

mod linalg;
mod quad;
mod special;

pub use error::{Error, Result};

/// A point or increment in the plane, indexed by coordinate (`0` is the
/// first coordinate).
pub type Point2 = [f64; 2];

/// Default `δ` for the moment hypotheses of the regime classification.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Means smaller than this in absolute value are treated as exactly zero.
pub const CENTERED_TOLERANCE: f64 = 1e-12;

/// Tolerance for atom probabilities summing to one.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;
