use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::Serialize;

use super::exact::exact_tail_1d;
use super::survival::{survival_curve, wilson_interval, Z_95};
use crate::chunk::ChunkRunner;
use crate::harmonic::{h1_estimate, LatticeH1};
use crate::model::{IncrementDistribution, Marginal1D};
use crate::{Error, Result};

/// `κ = (π·Var(X)/2)^{−1/2}`.
pub fn doney_kappa(variance: f64) -> f64 {
    1.0 / libm::sqrt(PI * variance / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoneyRow {
    pub n: u64,
    pub survival: f64,
    /// `√n·P[τₓ > n]`.
    pub scaled: f64,
    /// `√n·P[τₓ > n] / (κ·h₁(x))`.
    pub ratio: f64,
    /// Monte Carlo 95% interval for `ratio` (equal to `ratio` when exact).
    pub ratio_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoneyReport {
    pub x: f64,
    pub kappa: f64,
    pub h1: f64,
    pub kappa_h1: f64,
    /// `exact_dp` or `monte_carlo`.
    pub method: &'static str,
    pub rows: Vec<DoneyRow>,
    /// `|ratio − 1|` is non-increasing along the rows.
    pub monotone_approach: bool,
}

/// Survival estimate and its interval at one `n`.
type SurvivalRow = (f64, (f64, f64));

/// Tabulates `√n·P[τₓ > n]` against `κ·h₁(x)` for a centered 1-D law.
/// Integer-valued finite laws use exact dynamic programming and the
/// lattice solve for `h₁`; others use a Monte Carlo survival curve of the
/// walk paired with a never-exiting second coordinate, and a Monte Carlo
/// `h₁`.
pub fn doney_check<R: ChunkRunner>(
    marginal: &Marginal1D,
    x: f64,
    n_list: &[u64],
    paths: u64,
    master_seed: u64,
    runner: &R,
) -> Result<DoneyReport> {
    let mom = marginal.moments();
    if mom.mean != 0.0 {
        return Err(Error::NotCentered { mean: mom.mean });
    }
    if !(mom.variance.is_finite() && mom.variance > 0.0) {
        return Err(Error::InvalidArgument("variance must be finite and positive".into()));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidArgument(
            "n list must be positive and strictly increasing".into(),
        ));
    }
    let kappa = doney_kappa(mom.variance);
    let n_top = *n_list.last().unwrap();
    let lattice = matches!(marginal, Marginal1D::FiniteSupport(f) if f.is_integer_valued());
    let (h1, method, table): (f64, &'static str, Vec<SurvivalRow>) = if lattice {
        let truncation = (libm::ceil(x) as usize).saturating_mul(20).max(10_000);
        let h1 = LatticeH1::solve(marginal, truncation)?.value(x)?;
        let exact = exact_tail_1d(marginal, x, n_top as usize)?;
        let table = n_list
            .iter()
            .map(|&n| (exact[n as usize], (exact[n as usize], exact[n as usize])))
            .collect();
        (h1, "exact_dp", table)
    } else {
        let h1 = h1_estimate(marginal, x, n_top.max(10_000), paths, master_seed ^ 0x5eed, runner)?.value;
        let dist = IncrementDistribution::product(marginal.clone(), Marginal1D::finite(alloc::vec![(1.0, 1.0)])?);
        let curve = survival_curve(&dist, [x, 1.0], n_list, paths, master_seed, runner)?;
        let table = (0..n_list.len())
            .map(|i| (curve.estimates[i], wilson_interval(curve.survivors[i], paths, Z_95)))
            .collect();
        (h1, "monte_carlo", table)
    };
    let kappa_h1 = kappa * h1;
    let rows: Vec<DoneyRow> = n_list
        .iter()
        .zip(table)
        .map(|(&n, (p, (lo, hi)))| {
            let s = libm::sqrt(n as f64);
            DoneyRow {
                n,
                survival: p,
                scaled: s * p,
                ratio: s * p / kappa_h1,
                ratio_ci: (s * lo / kappa_h1, s * hi / kappa_h1),
            }
        })
        .collect();
    let monotone_approach = rows
        .windows(2)
        .all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs());
    Ok(DoneyReport {
        x,
        kappa,
        h1,
        kappa_h1,
        method,
        rows,
        monotone_approach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Sequential;

    #[test]
    fn unit_walk_constant() {
        let r = doney_check(&Marginal1D::symmetric_unit(), 1.0, &[100, 1000], 1000, 0, &Sequential).unwrap();
        assert!((r.kappa_h1 - libm::sqrt(2.0 / PI)).abs() < 1e-9);
        assert!(r.monotone_approach);
        assert!(r.rows[1].ratio < 1.0 && r.rows[1].ratio > 0.99);
    }
}
