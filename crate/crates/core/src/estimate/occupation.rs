use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::Serialize;

use super::survival::{SurvivalExperiment, MIN_PATHS};
use crate::chunk::{ChunkRunner, PathExperiment};
use crate::model::{derive_seed, IncrementDistribution, RngStream};
use crate::simulate::lindley_step;
use crate::{Error, Point2, Result};

/// Stream-family tags for the two independent runs.
const LINDLEY_TAG: u64 = 1;
const EXIT_TAG: u64 = 2;

/// Partial sums of `P[W⁰(n) ∈ [0,x₁)×[0,x₂)]`, computed from Lindley paths
/// started at `0` and, independently, from exit times at `x = box`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationSeries {
    pub box_corner: Point2,
    pub n_max: u64,
    pub paths: u64,
    pub master_seed: u64,
    /// `n = 0, …, n_max`.
    pub n: Vec<u64>,
    pub lindley_terms: Vec<f64>,
    pub exit_terms: Vec<f64>,
    pub lindley_partial_sums: Vec<f64>,
    pub exit_partial_sums: Vec<f64>,
    /// `(lindley − exit) / √(var₁ + var₂)` per term.
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    /// `(Σ_{≤ n_max} − Σ_{≤ n_max/10}) / ln 10` of the Lindley series: the
    /// coefficient `c` if the partial sums grow like `c·ln n`.
    pub log_growth: f64,
}

struct OccupationExperiment<'a> {
    dist: &'a IncrementDistribution,
    corner: Point2,
    n_max: u64,
    master_seed: u64,
}

impl PathExperiment for OccupationExperiment<'_> {
    type Partial = Vec<u64>;
    type Output = Vec<u64>;

    fn run_chunk(&self, range: Range<u64>) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_max as usize + 1];
        for i in range {
            let mut stream = RngStream::new(self.master_seed, i);
            let mut w = [0.0, 0.0];
            counts[0] += 1;
            for n in 1..=self.n_max as usize {
                w = lindley_step(w, self.dist.sample(&mut stream));
                if w[0] < self.corner[0] && w[1] < self.corner[1] {
                    counts[n] += 1;
                }
            }
        }
        counts
    }

    fn combine(&self, mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    }

    fn finish(&self, total: Vec<u64>, _paths: u64) -> Vec<u64> {
        total
    }
}

fn partial_sums(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// Estimates the occupation series of the box `[0,x₁)×[0,x₂)` two ways.
/// The Lindley run uses master seed `derive_seed(master_seed, 1)` and the
/// exit-time run `derive_seed(master_seed, 2)`, so the two are independent.
pub fn occupation_series<R: ChunkRunner>(
    dist: &IncrementDistribution,
    corner: Point2,
    n_max: u64,
    paths: u64,
    master_seed: u64,
    runner: &R,
) -> Result<OccupationSeries> {
    if !(corner[0] > 0.0 && corner[1] > 0.0) {
        return Err(Error::InvalidArgument("box corner must be strictly positive".into()));
    }
    if n_max == 0 || paths < MIN_PATHS {
        return Err(Error::InvalidArgument(alloc::format!(
            "n_max must be positive and paths at least {MIN_PATHS}"
        )));
    }
    let lindley_counts = runner.run(
        &OccupationExperiment {
            dist,
            corner,
            n_max,
            master_seed: derive_seed(master_seed, LINDLEY_TAG),
        },
        paths,
    );
    let grid: Vec<u64> = (1..=n_max).collect();
    let mut exit_counts = vec![paths];
    exit_counts.extend(runner.run(
        &SurvivalExperiment {
            dist,
            start: corner,
            n_grid: &grid,
            master_seed: derive_seed(master_seed, EXIT_TAG),
        },
        paths,
    ));
    let total = paths as f64;
    let lindley_terms: Vec<f64> = lindley_counts.iter().map(|&c| c as f64 / total).collect();
    let exit_terms: Vec<f64> = exit_counts.iter().map(|&c| c as f64 / total).collect();
    let z_scores: Vec<f64> = lindley_terms
        .iter()
        .zip(&exit_terms)
        .map(|(&a, &b)| {
            let var = (a * (1.0 - a) + b * (1.0 - b)) / total;
            if var > 0.0 {
                (a - b) / libm::sqrt(var)
            } else if a == b {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let lindley_partial_sums = partial_sums(&lindley_terms);
    let exit_partial_sums = partial_sums(&exit_terms);
    let top = lindley_partial_sums[n_max as usize];
    let tenth = lindley_partial_sums[(n_max / 10) as usize];
    Ok(OccupationSeries {
        box_corner: corner,
        n_max,
        paths,
        master_seed,
        n: (0..=n_max).collect(),
        lindley_terms,
        exit_terms,
        lindley_partial_sums,
        exit_partial_sums,
        z_scores,
        max_abs_z,
        log_growth: (top - tenth) / core::f64::consts::LN_10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Sequential;

    #[test]
    fn series_agree() {
        let d = IncrementDistribution::symmetric_unit_product();
        let s = occupation_series(&d, [2.0, 2.0], 200, 4000, 17, &Sequential).unwrap();
        assert_eq!(s.lindley_terms[0], 1.0);
        assert_eq!(s.exit_terms[0], 1.0);
        assert!(s.max_abs_z < 5.0, "max |z| = {}", s.max_abs_z);
    }
}
