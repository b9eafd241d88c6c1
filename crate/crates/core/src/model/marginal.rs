use alloc::format;
use alloc::vec::Vec;

use rand_distr::{Distribution, Zeta};
use serde::Serialize;

use super::moments::{Exactness, MarginalMoments, MomentBound};
use super::RngStream;
use crate::special::{hurwitz_zeta, normal_cdf, normal_pdf, zeta};
use crate::{Error, Result, PROBABILITY_SUM_TOLERANCE};

/// One-dimensional law with finitely many atoms `(value, probability)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSupport1D {
    atoms: Vec<(f64, f64)>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl FiniteSupport1D {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        validate_probabilities(atoms.iter().map(|a| a.1), "atoms")?;
        if atoms.iter().any(|a| !a.0.is_finite()) {
            return Err(Error::InvalidDistribution("atom values must be finite".into()));
        }
        let cumulative = cumulative(atoms.iter().map(|a| a.1));
        Ok(Self { atoms, cumulative })
    }

    /// Two atoms `±1` with probability `1/2` each.
    pub fn symmetric_unit() -> Self {
        Self::new(alloc::vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap()
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_integer_valued(&self) -> bool {
        self.atoms.iter().all(|(v, _)| libm::trunc(*v) == *v)
    }

    #[inline]
    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        let u = stream.uniform();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[idx.min(self.atoms.len() - 1)].0
    }

    fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * f(v)).sum()
    }
}

/// Integer law with a power-law negative tail: `P[X = −k] = q·k^{−β}/ζ(β)`
/// for `k = 1, 2, …`, plus an atom at `+c` of mass `1 − q`.
/// `E|X|^r < ∞` exactly when `r < β − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerNegativeTail {
    beta: f64,
    neg_mass: f64,
    positive_atom: f64,
}

impl PowerNegativeTail {
    pub fn new(beta: f64, neg_mass: f64, positive_atom: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "power tail exponent β = {beta} must exceed 1"
            )));
        }
        if !(neg_mass > 0.0 && neg_mass < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative-tail mass q = {neg_mass} must lie in (0, 1)"
            )));
        }
        if !(positive_atom > 0.0) || !positive_atom.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "positive atom c = {positive_atom} must be positive"
            )));
        }
        Ok(Self {
            beta,
            neg_mass,
            positive_atom,
        })
    }

    /// Chooses the positive atom so that `E X = mean`. Needs `β > 2`.
    pub fn with_mean(beta: f64, neg_mass: f64, mean: f64) -> Result<Self> {
        if !(beta > 2.0) {
            return Err(Error::InvalidDistribution(format!(
                "a prescribed mean needs β > 2 (got {beta}); E X⁻ is infinite otherwise"
            )));
        }
        let neg_mean = neg_mass * zeta(beta - 1.0) / zeta(beta);
        Self::new(beta, neg_mass, (mean + neg_mean) / (1.0 - neg_mass))
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn neg_mass(&self) -> f64 {
        self.neg_mass
    }

    pub fn positive_atom(&self) -> f64 {
        self.positive_atom
    }

    /// Weight `P[X = −k]`.
    pub fn weight(&self, k: u64) -> f64 {
        self.neg_mass * libm::pow(k as f64, -self.beta) / zeta(self.beta)
    }

    /// `Σ_{k ≥ from} P[X = −k]·k^j`, infinite when the series diverges.
    pub fn tail_power_sum(&self, j: f64, from: u64) -> f64 {
        let s = self.beta - j;
        if s <= 1.0 {
            return f64::INFINITY;
        }
        self.neg_mass * hurwitz_zeta(s, from.max(1) as f64) / zeta(self.beta)
    }

    /// Partial sum `Σ_{k ≤ terms} P[X = −k]·k^r` of `E[(X⁻)^r]`.
    pub fn partial_neg_moment(&self, r: f64, terms: u64) -> f64 {
        (1..=terms).map(|k| self.weight(k) * libm::pow(k as f64, r)).sum()
    }

    fn neg_moment(&self, r: f64) -> f64 {
        self.tail_power_sum(r, 1)
    }

    #[inline]
    fn sample(&self, stream: &mut RngStream) -> f64 {
        if stream.uniform() >= self.neg_mass {
            self.positive_atom
        } else {
            let zeta = Zeta::new(self.beta).expect("β > 1 checked at construction");
            -zeta.sample(stream.inner())
        }
    }
}

/// A one-dimensional increment law.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal1D {
    FiniteSupport(FiniteSupport1D),
    Gaussian { mean: f64, variance: f64 },
    PowerNegativeTail(PowerNegativeTail),
}

impl Marginal1D {
    pub fn finite(atoms: Vec<(f64, f64)>) -> Result<Self> {
        FiniteSupport1D::new(atoms).map(Marginal1D::FiniteSupport)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "Gaussian needs finite mean and variance ≥ 0 (got {mean}, {variance})"
            )));
        }
        Ok(Marginal1D::Gaussian { mean, variance })
    }

    /// The `±1` walk marginal.
    pub fn symmetric_unit() -> Self {
        Marginal1D::FiniteSupport(FiniteSupport1D::symmetric_unit())
    }

    #[inline]
    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        match self {
            Marginal1D::FiniteSupport(f) => f.sample(stream),
            Marginal1D::Gaussian { mean, variance } => mean + libm::sqrt(*variance) * stream.standard_normal(),
            Marginal1D::PowerNegativeTail(p) => p.sample(stream),
        }
    }

    /// True when the law is a single point mass.
    pub fn is_point_mass(&self) -> bool {
        match self {
            Marginal1D::FiniteSupport(f) => {
                let first = f.atoms[0].0;
                f.atoms.iter().all(|a| a.0 == first)
            }
            Marginal1D::Gaussian { variance, .. } => *variance == 0.0,
            Marginal1D::PowerNegativeTail(_) => false,
        }
    }

    /// `P[X > 0]`.
    pub fn prob_positive(&self) -> f64 {
        match self {
            Marginal1D::FiniteSupport(f) => f.expect(|v| if v > 0.0 { 1.0 } else { 0.0 }),
            Marginal1D::Gaussian { mean, variance } => {
                if *variance == 0.0 {
                    if *mean > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_cdf(mean / libm::sqrt(*variance))
                }
            }
            Marginal1D::PowerNegativeTail(p) => 1.0 - p.neg_mass,
        }
    }

    /// `F(t) = P[X ≤ t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Marginal1D::FiniteSupport(f) => f.expect(|v| if v <= t { 1.0 } else { 0.0 }),
            Marginal1D::Gaussian { mean, variance } => {
                if *variance == 0.0 {
                    if *mean <= t {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_cdf((t - mean) / libm::sqrt(*variance))
                }
            }
            Marginal1D::PowerNegativeTail(p) => {
                let positive = if p.positive_atom <= t { 1.0 - p.neg_mass } else { 0.0 };
                // atoms −k ≤ t  ⇔  k ≥ −t
                let k_min = libm::ceil(-t).max(1.0);
                positive + p.tail_power_sum(0.0, k_min as u64)
            }
        }
    }

    /// Exact (or series-summed) moments.
    pub fn moments(&self) -> MarginalMoments {
        match self {
            Marginal1D::FiniteSupport(f) => {
                let mean = f.expect(|v| v);
                let second = f.expect(|v| v * v);
                let mut m = MarginalMoments {
                    mean,
                    variance: f.expect(|v| (v - mean) * (v - mean)),
                    second_moment: second,
                    pos_part_mean: f.expect(|v| v.max(0.0)),
                    neg_part_mean: f.expect(|v| (-v).max(0.0)),
                    neg_part_second_moment: f.expect(|v| {
                        let n = (-v).max(0.0);
                        n * n
                    }),
                    abs_moments: MomentBound::AllFinite,
                    neg_moments: MomentBound::AllFinite,
                    exactness: Exactness::Exact,
                    assumed_centered: false,
                };
                m.snap_mean();
                m
            }
            Marginal1D::Gaussian { mean, variance } => {
                let sigma = libm::sqrt(*variance);
                let (pos, neg_second) = if sigma == 0.0 {
                    let n = (-mean).max(0.0);
                    (mean.max(0.0), n * n)
                } else {
                    let z = mean / sigma;
                    (
                        mean * normal_cdf(z) + sigma * normal_pdf(z),
                        (mean * mean + variance) * normal_cdf(-z) - mean * sigma * normal_pdf(z),
                    )
                };
                MarginalMoments {
                    mean: *mean,
                    variance: *variance,
                    second_moment: mean * mean + variance,
                    pos_part_mean: pos,
                    neg_part_mean: pos - mean,
                    neg_part_second_moment: neg_second,
                    abs_moments: MomentBound::AllFinite,
                    neg_moments: MomentBound::AllFinite,
                    exactness: Exactness::Exact,
                    assumed_centered: false,
                }
            }
            Marginal1D::PowerNegativeTail(p) => {
                let c = p.positive_atom;
                let pos_mass = 1.0 - p.neg_mass;
                let neg_mean = p.neg_moment(1.0);
                let neg_second = p.neg_moment(2.0);
                let mean = pos_mass * c - neg_mean;
                let second = pos_mass * c * c + neg_second;
                let mut m = MarginalMoments {
                    mean,
                    variance: if second.is_finite() {
                        second - mean * mean
                    } else {
                        f64::INFINITY
                    },
                    second_moment: second,
                    pos_part_mean: pos_mass * c,
                    neg_part_mean: neg_mean,
                    neg_part_second_moment: neg_second,
                    abs_moments: MomentBound::FiniteBelow(p.beta - 1.0),
                    neg_moments: MomentBound::FiniteBelow(p.beta - 1.0),
                    exactness: Exactness::Numerical { error_bound: 1e-10 },
                    assumed_centered: false,
                };
                m.snap_mean();
                m
            }
        }
    }
}

pub(super) fn validate_probabilities<I: Iterator<Item = f64>>(probs: I, what: &str) -> Result<()> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for p in probs {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "{what}: probability {p} is outside (0, 1]"
            )));
        }
        sum += p;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidDistribution(format!("{what}: no atoms")));
    }
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "{what}: probabilities sum to {sum}, expected 1 within {PROBABILITY_SUM_TOLERANCE:e}"
        )));
    }
    Ok(())
}

pub(super) fn cumulative<I: Iterator<Item = f64>>(probs: I) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_marginal_moments() {
        let m = Marginal1D::finite(alloc::vec![(1.0, 2.0 / 3.0), (-2.0, 1.0 / 3.0)]).unwrap();
        let mom = m.moments();
        assert_eq!(mom.mean, 0.0);
        assert!((mom.neg_part_second_moment - 4.0 / 3.0).abs() < 1e-15);
        assert!((mom.variance - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bad_probability_sum_rejected() {
        let err = Marginal1D::finite(alloc::vec![(1.0, 0.5), (-1.0, 0.4)]).unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution(_)));
    }

    #[test]
    fn power_tail_mean_is_prescribed() {
        let p = PowerNegativeTail::with_mean(4.5, 0.3, 0.7).unwrap();
        let mom = Marginal1D::PowerNegativeTail(p).moments();
        assert!((mom.mean - 0.7).abs() < 1e-12);
        assert_eq!(mom.abs_moments, MomentBound::FiniteBelow(3.5));
    }

    #[test]
    fn power_tail_weights_sum_to_neg_mass() {
        let p = PowerNegativeTail::new(2.5, 0.4, 1.0).unwrap();
        let direct = p.partial_neg_moment(0.0, 200_000);
        let tail = p.tail_power_sum(0.0, 200_001);
        assert!((direct + tail - 0.4).abs() < 1e-12);
    }

    #[test]
    fn power_tail_requires_beta_above_one() {
        assert!(PowerNegativeTail::new(1.0, 0.5, 1.0).is_err());
        assert!(PowerNegativeTail::with_mean(2.0, 0.5, 0.0).is_err());
    }
}
