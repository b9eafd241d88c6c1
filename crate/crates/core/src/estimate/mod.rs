//! Estimation of `P[τₓ > n]`: shared-path Monte Carlo survival curves,
//! exact dynamic programming for lattice laws, log-log exponent fits and
//! recurrence diagnostics based on occupation series.

mod doney;
mod exact;
mod fit;
mod occupation;
mod survival;

pub use doney::{doney_check, doney_kappa, DoneyReport, DoneyRow};
pub use exact::{exact_tail_1d, exact_tail_lattice, ExactTail, DEFAULT_CELL_BUDGET};
pub use fit::{
    decay_check, fit_tail_exponent, flat_tail_check, DecayCheck, ExponentFit, FitWindow, FlatTailCheck, MIN_SURVIVORS,
};
pub use occupation::{occupation_series, OccupationSeries};
pub use survival::{geometric_grid, survival_curve, wilson_interval, SurvivalCurve, MIN_PATHS, Z_95, Z_99};
