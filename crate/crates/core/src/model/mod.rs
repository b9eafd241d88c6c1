//! Increment laws `X = (X₁, X₂)`, their exact moments, and the standing
//! assumptions on their support.

mod assumptions;
mod distribution;
mod marginal;
mod moments;
mod rng;

pub use assumptions::AssumptionReport;
pub use distribution::{BivariateGaussian, FiniteSupport2D, IncrementDistribution};
pub use marginal::{FiniteSupport1D, Marginal1D, PowerNegativeTail};
pub use moments::{Drift, Exactness, MarginalMoments, MomentBound, MomentReport};
pub use rng::{derive_seed, RngStream};
