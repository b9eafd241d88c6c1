use alloc::vec::Vec;

use serde::Serialize;

use super::path::lindley_step;
use crate::model::RngStream;
use crate::Point2;

/// `W⁰(n)` computed without recursion: `max_{0≤k≤n} −(S(n) − S(n−k))`,
/// coordinate-wise, for `increments = X(1), …, X(n)`.
pub fn dual_waiting_time(increments: &[Point2]) -> Point2 {
    let mut acc = [0.0f64, 0.0];
    let mut best = [0.0f64, 0.0];
    for x in increments.iter().rev() {
        for i in 0..2 {
            acc[i] -= x[i];
            best[i] = best[i].max(acc[i]);
        }
    }
    best
}

/// Discrepancy between the Lindley recursion from `0` and
/// [`dual_waiting_time`] on one increment sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityDeviation {
    pub recursion: Point2,
    pub unrolled: Point2,
    pub max_abs: f64,
    /// `max_abs` relative to `max(|W|, max |X|)` over both coordinates.
    pub max_rel: f64,
}

pub fn duality_deviation(increments: &[Point2]) -> DualityDeviation {
    let recursion = increments.iter().fold([0.0, 0.0], |w, &x| lindley_step(w, x));
    let unrolled = dual_waiting_time(increments);
    let scale = increments
        .iter()
        .flat_map(|x| x.iter())
        .chain(recursion.iter())
        .chain(unrolled.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let max_abs = (0..2).map(|i| (recursion[i] - unrolled[i]).abs()).fold(0.0, f64::max);
    DualityDeviation {
        recursion,
        unrolled,
        max_abs,
        max_rel: if scale > 0.0 { max_abs / scale } else { 0.0 },
    }
}

/// A randomized increment sequence for the duality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityTrial {
    pub index: u64,
    /// Integer increments in `{−3, …, 3}²` (otherwise correlated Gaussian).
    pub lattice: bool,
    pub increments: Vec<Point2>,
}

/// Trial `index` of seed `master_seed`: even indices are lattice, odd are
/// Gaussian; lengths are uniform on `0..=max_len`.
pub fn random_duality_trial(master_seed: u64, index: u64, max_len: usize) -> DualityTrial {
    let mut stream = RngStream::new(master_seed, index);
    let len = ((stream.uniform() * (max_len + 1) as f64) as usize).min(max_len);
    let lattice = index.is_multiple_of(2);
    let rho = 2.0 * stream.uniform() - 1.0;
    let increments = (0..len)
        .map(|_| {
            if lattice {
                let draw = |s: &mut RngStream| libm::floor(s.uniform() * 7.0) - 3.0;
                [draw(&mut stream), draw(&mut stream)]
            } else {
                let z1 = stream.standard_normal();
                let z2 = stream.standard_normal();
                [z1, rho * z1 + libm::sqrt(1.0 - rho * rho) * z2]
            }
        })
        .collect();
    DualityTrial {
        index,
        lattice,
        increments,
    }
}
