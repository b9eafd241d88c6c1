//! Path-level engine: the free walk `S(n)`, the Lindley process `W(n)`,
//! the reflected walk `R(n)`, exit times from the open quadrant, and
//! running extrema.
//!
//! Exit is closed at the boundary: coordinate `i` has exited at the first
//! `n ≥ 1` with `xᵢ + Sᵢ(n) ≤ 0`.

mod duality;
mod exit;
mod path;

pub use duality::{dual_waiting_time, duality_deviation, random_duality_trial, DualityDeviation, DualityTrial};
pub use exit::{coordinate_exit_time, exit_time, exit_time_along, ExitCoordinate, ExitTime, ExitTimeResult};
pub use path::{
    lindley_path, lindley_step, reflected_path, reflected_step, trajectory, ReflectedComparison, TrajectoryRow,
    WalkPath,
};
