use serde::Serialize;

use crate::model::{IncrementDistribution, RngStream};
use crate::{Error, Point2, Result};

/// `τₓ`, or censoring at the horizon (`τₓ > horizon`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum ExitTime {
    Exited(u64),
    Censored(u64),
}

impl ExitTime {
    /// Whether `τ > n` is known to hold. Only meaningful for `n` up to the
    /// horizon.
    #[inline]
    pub fn survives(&self, n: u64) -> bool {
        match *self {
            ExitTime::Exited(t) => t > n,
            ExitTime::Censored(_) => true,
        }
    }

    pub fn exited(&self) -> Option<u64> {
        match *self {
            ExitTime::Exited(t) => Some(t),
            ExitTime::Censored(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitCoordinate {
    First,
    Second,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitTimeResult {
    pub tau: ExitTime,
    pub exit_coordinate: ExitCoordinate,
    /// `x₁ + S₁(τₓ)`, the first coordinate at the exit time, whichever
    /// coordinate caused the exit. `None` when censored.
    pub overshoot1: Option<f64>,
    /// Position `x + S(min(τ, horizon))`.
    pub final_position: Point2,
}

fn check_start(x: Point2, horizon: u64) -> Result<()> {
    if !(x[0] > 0.0 && x[1] > 0.0) || !x.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "start {x:?} must lie in the open quadrant"
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Walks `x + S(n)` along the given increments until a coordinate is
/// `≤ 0` or `horizon` steps have been taken.
#[inline]
pub fn exit_time_along<I: IntoIterator<Item = Point2>>(x: Point2, increments: I, horizon: u64) -> ExitTimeResult {
    let mut pos = x;
    let mut steps = increments.into_iter();
    for n in 1..=horizon {
        let Some(inc) = steps.next() else {
            break;
        };
        pos[0] += inc[0];
        pos[1] += inc[1];
        let out1 = pos[0] <= 0.0;
        let out2 = pos[1] <= 0.0;
        if out1 || out2 {
            let exit_coordinate = match (out1, out2) {
                (true, true) => ExitCoordinate::Both,
                (true, false) => ExitCoordinate::First,
                _ => ExitCoordinate::Second,
            };
            return ExitTimeResult {
                tau: ExitTime::Exited(n),
                exit_coordinate,
                overshoot1: Some(pos[0]),
                final_position: pos,
            };
        }
    }
    ExitTimeResult {
        tau: ExitTime::Censored(horizon),
        exit_coordinate: ExitCoordinate::None,
        overshoot1: None,
        final_position: pos,
    }
}

/// Exit time of `x + S(n)` from the open quadrant with fresh increments.
#[inline]
pub fn exit_time(
    dist: &IncrementDistribution,
    x: Point2,
    horizon: u64,
    stream: &mut RngStream,
) -> Result<ExitTimeResult> {
    check_start(x, horizon)?;
    Ok(exit_time_along(
        x,
        core::iter::repeat_with(|| dist.sample(stream)),
        horizon,
    ))
}

/// `τ_{xᵢ} = inf{n ≥ 1 : xᵢ + Sᵢ(n) ≤ 0}` for one coordinate.
pub fn coordinate_exit_time<I: IntoIterator<Item = f64>>(x: f64, increments: I, horizon: u64) -> ExitTime {
    let mut pos = x;
    let mut steps = increments.into_iter();
    for n in 1..=horizon {
        let Some(inc) = steps.next() else {
            break;
        };
        pos += inc;
        if pos <= 0.0 {
            return ExitTime::Exited(n);
        }
    }
    ExitTime::Censored(horizon)
}
