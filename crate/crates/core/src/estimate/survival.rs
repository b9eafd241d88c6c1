use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::Serialize;

use crate::chunk::{ChunkRunner, PathExperiment};
use crate::model::{IncrementDistribution, RngStream};
use crate::simulate::{exit_time_along, ExitTime};
use crate::{Error, Point2, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Smallest number of paths accepted by [`survival_curve`].
pub const MIN_PATHS: u64 = 1000;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// About `per_decade` log-spaced integers from `lo` to `hi` inclusive,
/// deduplicated.
pub fn geometric_grid(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    let lo = lo.max(1);
    if hi < lo {
        return Vec::new();
    }
    let steps = (libm::log10(hi as f64 / lo as f64) * per_decade as f64).ceil().max(1.0) as u32;
    let ratio = libm::pow(hi as f64 / lo as f64, 1.0 / steps as f64);
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| libm::round(lo as f64 * libm::pow(ratio, k as f64)) as u64)
        .collect();
    out[0] = lo;
    *out.last_mut().unwrap() = hi;
    out.dedup();
    out
}

/// Monte Carlo estimate of `n ↦ P[τₓ > n]` on a grid, every path serving
/// every grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub n_grid: Vec<u64>,
    pub survivors: Vec<u64>,
    pub estimates: Vec<f64>,
    /// 95% Wilson interval.
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub paths: u64,
    pub master_seed: u64,
    pub start: Point2,
    pub censor_horizon: u64,
}

impl SurvivalCurve {
    /// Builds the curve from survivor counts.
    pub fn from_counts(
        n_grid: Vec<u64>,
        survivors: Vec<u64>,
        paths: u64,
        master_seed: u64,
        start: Point2,
    ) -> Result<Self> {
        if n_grid.len() != survivors.len() || n_grid.is_empty() {
            return Err(Error::InvalidArgument(
                "grid and counts must be non-empty and of equal length".into(),
            ));
        }
        if survivors.iter().any(|&s| s > paths) {
            return Err(Error::InvalidArgument("more survivors than paths".into()));
        }
        let estimates = survivors.iter().map(|&s| s as f64 / paths as f64).collect();
        let (ci_low, ci_high) = survivors.iter().map(|&s| wilson_interval(s, paths, Z_95)).unzip();
        Ok(Self {
            censor_horizon: *n_grid.last().unwrap(),
            n_grid,
            survivors,
            estimates,
            ci_low,
            ci_high,
            paths,
            master_seed,
            start,
        })
    }

    /// Index of grid point `n`, if present.
    pub fn index_of(&self, n: u64) -> Option<usize> {
        self.n_grid.binary_search(&n).ok()
    }
}

pub(crate) struct SurvivalExperiment<'a> {
    pub dist: &'a IncrementDistribution,
    pub start: Point2,
    pub n_grid: &'a [u64],
    pub master_seed: u64,
}

impl PathExperiment for SurvivalExperiment<'_> {
    /// `hist[k]` counts paths that survive exactly the first `k` grid points.
    type Partial = Vec<u64>;
    type Output = Vec<u64>;

    fn run_chunk(&self, range: Range<u64>) -> Vec<u64> {
        let horizon = *self.n_grid.last().unwrap();
        let mut hist = vec![0u64; self.n_grid.len() + 1];
        for i in range {
            let mut stream = RngStream::new(self.master_seed, i);
            let r = exit_time_along(
                self.start,
                core::iter::repeat_with(|| self.dist.sample(&mut stream)),
                horizon,
            );
            let k = match r.tau {
                ExitTime::Exited(t) => self.n_grid.partition_point(|&n| n < t),
                ExitTime::Censored(_) => self.n_grid.len(),
            };
            hist[k] += 1;
        }
        hist
    }

    fn combine(&self, mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    }

    fn finish(&self, hist: Vec<u64>, _paths: u64) -> Vec<u64> {
        // survivors at grid point j: paths surviving more than j points
        let mut survivors = vec![0u64; self.n_grid.len()];
        let mut acc = 0;
        for j in (0..self.n_grid.len()).rev() {
            acc += hist[j + 1];
            survivors[j] = acc;
        }
        survivors
    }
}

pub(crate) fn validate_grid(n_grid: &[u64]) -> Result<()> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "n grid must be non-empty and strictly increasing".into(),
        ));
    }
    if n_grid[0] == 0 {
        return Err(Error::InvalidArgument("n grid must start at n >= 1".into()));
    }
    Ok(())
}

/// Simulates `paths` walks from `x` up to `max(n_grid)` (or exit) and
/// estimates `P[τₓ > n]` at every grid point from the same paths. Path `i`
/// uses stream `i` of `master_seed`.
pub fn survival_curve<R: ChunkRunner>(
    dist: &IncrementDistribution,
    x: Point2,
    n_grid: &[u64],
    paths: u64,
    master_seed: u64,
    runner: &R,
) -> Result<SurvivalCurve> {
    if !(x[0] > 0.0 && x[1] > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "start {x:?} must lie in the open quadrant"
        )));
    }
    validate_grid(n_grid)?;
    if paths < MIN_PATHS {
        return Err(Error::InvalidArgument(alloc::format!(
            "at least {MIN_PATHS} paths are required"
        )));
    }
    let survivors = runner.run(
        &SurvivalExperiment {
            dist,
            start: x,
            n_grid,
            master_seed,
        },
        paths,
    );
    SurvivalCurve::from_counts(n_grid.to_vec(), survivors, paths, master_seed, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Sequential;

    #[test]
    fn wilson_contains_estimate() {
        for (s, n) in [(0, 100), (3, 100), (50, 100), (100, 100), (1, 1_000_000)] {
            let (lo, hi) = wilson_interval(s, n, Z_95);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        // textbook value: 8 of 10 at 95% gives (0.490, 0.943)
        let (lo, hi) = wilson_interval(8, 10, Z_95);
        assert!((lo - 0.4902).abs() < 1e-4 && (hi - 0.9433).abs() < 1e-4);
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(100, 10_000, 10);
        assert_eq!(g[0], 100);
        assert_eq!(*g.last().unwrap(), 10_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.len(), 21);
    }

    #[test]
    fn deterministic_descent() {
        let d = IncrementDistribution::finite(vec![([-1.0, -1.0], 1.0)]).unwrap();
        let c = survival_curve(&d, [2.5, 2.5], &[1, 2, 3, 4, 10], 1000, 0, &Sequential).unwrap();
        assert_eq!(c.estimates, vec![1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn monotone_and_bracketed() {
        let d = IncrementDistribution::symmetric_unit_product();
        let c = survival_curve(&d, [1.0, 1.0], &geometric_grid(1, 1000, 8), 5000, 42, &Sequential).unwrap();
        assert!(c.estimates.windows(2).all(|w| w[1] <= w[0]));
        for i in 0..c.estimates.len() {
            assert!(c.ci_low[i] <= c.estimates[i] && c.estimates[i] <= c.ci_high[i]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert!(survival_curve(&d, [1.0, 1.0], &[2, 1], 1000, 0, &Sequential).is_err());
        assert!(survival_curve(&d, [1.0, 1.0], &[1, 2], 10, 0, &Sequential).is_err());
        assert!(survival_curve(&d, [0.0, 1.0], &[1, 2], 1000, 0, &Sequential).is_err());
    }
}
