use alloc::format;
use alloc::vec::Vec;

use serde::Serialize;

use super::assumptions::{gaussian_quadrant_probability, AssumptionReport};
use super::marginal::{cumulative, validate_probabilities};
use super::moments::{Exactness, MomentReport};
use super::{Marginal1D, RngStream};
use crate::{Error, Point2, Result};

/// Two-dimensional law with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSupport2D {
    atoms: Vec<(Point2, f64)>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl FiniteSupport2D {
    pub fn new(atoms: Vec<(Point2, f64)>) -> Result<Self> {
        validate_probabilities(atoms.iter().map(|a| a.1), "atoms")?;
        if atoms.iter().any(|a| !a.0[0].is_finite() || !a.0[1].is_finite()) {
            return Err(Error::InvalidDistribution("atom values must be finite".into()));
        }
        let cumulative = cumulative(atoms.iter().map(|a| a.1));
        Ok(Self { atoms, cumulative })
    }

    pub fn atoms(&self) -> &[(Point2, f64)] {
        &self.atoms
    }

    fn expect<F: Fn(Point2) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * f(v)).sum()
    }
}

/// Bivariate normal law, sampled through the Cholesky factor of its
/// covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariateGaussian {
    mean: Point2,
    covariance: [[f64; 2]; 2],
    #[serde(skip)]
    cholesky: [f64; 3],
}

impl BivariateGaussian {
    pub fn new(mean: Point2, covariance: [[f64; 2]; 2]) -> Result<Self> {
        let [[c11, c12], [c21, c22]] = covariance;
        if !mean.iter().chain([c11, c12, c21, c22].iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidDistribution("Gaussian parameters must be finite".into()));
        }
        let scale = c11.abs().max(c22.abs()).max(f64::MIN_POSITIVE);
        if (c12 - c21).abs() > 1e-12 * scale {
            return Err(Error::InvalidDistribution(format!(
                "covariance is not symmetric ({c12} vs {c21})"
            )));
        }
        if c11 < 0.0 || c22 < 0.0 || c11 * c22 - c12 * c21 < -1e-12 * scale * scale {
            return Err(Error::InvalidDistribution(
                "covariance is not positive semi-definite".into(),
            ));
        }
        let l11 = libm::sqrt(c11);
        let l21 = if l11 > 0.0 { c12 / l11 } else { 0.0 };
        let l22 = libm::sqrt((c22 - l21 * l21).max(0.0));
        Ok(Self {
            mean,
            covariance: [[c11, c12], [c12, c22]],
            cholesky: [l11, l21, l22],
        })
    }

    pub fn mean(&self) -> Point2 {
        self.mean
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        self.covariance
    }

    /// Correlation, when both variances are positive.
    pub fn rho(&self) -> Option<f64> {
        let [[c11, c12], [_, c22]] = self.covariance;
        (c11 > 0.0 && c22 > 0.0).then(|| (c12 / libm::sqrt(c11 * c22)).clamp(-1.0, 1.0))
    }

    /// Standard bivariate normal with correlation `rho`.
    pub fn standard(rho: f64) -> Result<Self> {
        Self::new([0.0, 0.0], [[1.0, rho], [rho, 1.0]])
    }
}

/// Law of the increment `X = (X₁, X₂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IncrementDistribution {
    FiniteSupport2D(FiniteSupport2D),
    BivariateGaussian(BivariateGaussian),
    /// Independent coordinates.
    ProductOfMarginals {
        first: Marginal1D,
        second: Marginal1D,
    },
}

impl IncrementDistribution {
    pub fn finite(atoms: Vec<(Point2, f64)>) -> Result<Self> {
        FiniteSupport2D::new(atoms).map(IncrementDistribution::FiniteSupport2D)
    }

    pub fn gaussian(mean: Point2, covariance: [[f64; 2]; 2]) -> Result<Self> {
        BivariateGaussian::new(mean, covariance).map(IncrementDistribution::BivariateGaussian)
    }

    pub fn product(first: Marginal1D, second: Marginal1D) -> Self {
        IncrementDistribution::ProductOfMarginals { first, second }
    }

    /// Independent `±1` coordinates (the simple walk on the diagonal lattice).
    pub fn symmetric_unit_product() -> Self {
        Self::product(Marginal1D::symmetric_unit(), Marginal1D::symmetric_unit())
    }

    /// One draw of `X`.
    #[inline]
    pub fn sample(&self, stream: &mut RngStream) -> Point2 {
        match self {
            IncrementDistribution::FiniteSupport2D(f) => {
                let u = stream.uniform();
                let idx = f.cumulative.partition_point(|&c| c <= u);
                f.atoms[idx.min(f.atoms.len() - 1)].0
            }
            IncrementDistribution::BivariateGaussian(g) => {
                let z1 = stream.standard_normal();
                let z2 = stream.standard_normal();
                let [l11, l21, l22] = g.cholesky;
                [g.mean[0] + l11 * z1, g.mean[1] + l21 * z1 + l22 * z2]
            }
            IncrementDistribution::ProductOfMarginals { first, second } => {
                let x1 = first.sample(stream);
                [x1, second.sample(stream)]
            }
        }
    }

    /// Marginal law of coordinate `i` (0 or 1).
    pub fn marginal(&self, i: usize) -> Marginal1D {
        assert!(i < 2, "coordinate index {i} out of range");
        match self {
            IncrementDistribution::FiniteSupport2D(f) => {
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for &(v, p) in &f.atoms {
                    match merged.iter_mut().find(|(value, _)| *value == v[i]) {
                        Some(slot) => slot.1 += p,
                        None => merged.push((v[i], p)),
                    }
                }
                // Merging can push a sum of probabilities a rounding step past 1.
                for slot in merged.iter_mut() {
                    slot.1 = slot.1.min(1.0);
                }
                Marginal1D::finite(merged).expect("marginal of a valid law is valid")
            }
            IncrementDistribution::BivariateGaussian(g) => Marginal1D::Gaussian {
                mean: g.mean[i],
                variance: g.covariance[i][i],
            },
            IncrementDistribution::ProductOfMarginals { first, second } => {
                if i == 0 {
                    first.clone()
                } else {
                    second.clone()
                }
            }
        }
    }

    /// Exact moments (series-summed for power tails).
    pub fn moments(&self) -> MomentReport {
        match self {
            IncrementDistribution::FiniteSupport2D(f) => {
                let m = [self.marginal(0).moments(), self.marginal(1).moments()];
                let mean = [f.expect(|v| v[0]), f.expect(|v| v[1])];
                let cov = f.expect(|v| (v[0] - mean[0]) * (v[1] - mean[1]));
                MomentReport::from_parts(m, cov)
            }
            IncrementDistribution::BivariateGaussian(g) => {
                let m = [self.marginal(0).moments(), self.marginal(1).moments()];
                MomentReport::from_parts(m, g.covariance[0][1])
            }
            IncrementDistribution::ProductOfMarginals { first, second } => {
                MomentReport::from_parts([first.moments(), second.moments()], 0.0)
            }
        }
    }

    /// Checks that the support is not contained in a line and that the
    /// open quadrant has positive mass.
    pub fn check_assumptions(&self) -> AssumptionReport {
        match self {
            IncrementDistribution::FiniteSupport2D(f) => {
                let m1 = f.expect(|v| v[0]);
                let m2 = f.expect(|v| v[1]);
                let c11 = f.expect(|v| (v[0] - m1) * (v[0] - m1));
                let c22 = f.expect(|v| (v[1] - m2) * (v[1] - m2));
                let c12 = f.expect(|v| (v[0] - m1) * (v[1] - m2));
                let quadrant = f.expect(|v| if v[0] > 0.0 && v[1] > 0.0 { 1.0 } else { 0.0 });
                AssumptionReport::new(covariance_is_singular(c11, c12, c22), quadrant, Exactness::Exact)
            }
            IncrementDistribution::BivariateGaussian(g) => {
                let [[c11, c12], [_, c22]] = g.covariance;
                let (p, exactness) = gaussian_quadrant_probability(g.mean, g.covariance);
                AssumptionReport::new(covariance_is_singular(c11, c12, c22), p, exactness)
            }
            IncrementDistribution::ProductOfMarginals { first, second } => AssumptionReport::new(
                first.is_point_mass() || second.is_point_mass(),
                first.prob_positive() * second.prob_positive(),
                Exactness::Exact,
            ),
        }
    }

    /// All atoms, when the law has finite support (directly or as a
    /// product of finite marginals).
    pub fn finite_atoms(&self) -> Option<Vec<(Point2, f64)>> {
        match self {
            IncrementDistribution::FiniteSupport2D(f) => Some(f.atoms.clone()),
            IncrementDistribution::ProductOfMarginals {
                first: Marginal1D::FiniteSupport(a),
                second: Marginal1D::FiniteSupport(b),
            } => Some(
                a.atoms()
                    .iter()
                    .flat_map(|&(v1, p1)| b.atoms().iter().map(move |&(v2, p2)| ([v1, v2], p1 * p2)))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Integer atoms, when the law is finite and lattice valued.
    pub fn lattice_atoms(&self) -> Option<Vec<([i64; 2], f64)>> {
        let atoms = self.finite_atoms()?;
        atoms
            .into_iter()
            .map(|(v, p)| {
                let integral = v.iter().all(|c| libm::trunc(*c) == *c && c.abs() < 1e15);
                integral.then_some(([v[0] as i64, v[1] as i64], p))
            })
            .collect()
    }

    /// The same law with coordinates exchanged.
    pub fn swapped(&self) -> Self {
        match self {
            IncrementDistribution::FiniteSupport2D(f) => {
                Self::finite(f.atoms.iter().map(|&(v, p)| ([v[1], v[0]], p)).collect()).unwrap()
            }
            IncrementDistribution::BivariateGaussian(g) => {
                let [[c11, c12], [_, c22]] = g.covariance;
                Self::gaussian([g.mean[1], g.mean[0]], [[c22, c12], [c12, c11]]).unwrap()
            }
            IncrementDistribution::ProductOfMarginals { first, second } => Self::product(second.clone(), first.clone()),
        }
    }

    /// Law of `(s₁X₁, s₂X₂)` for positive scales. Power-tail marginals
    /// cannot be rescaled within their family.
    pub fn scaled(&self, scale: Point2) -> Result<Self> {
        if !(scale[0] > 0.0 && scale[1] > 0.0) {
            return Err(Error::InvalidArgument("scales must be positive".into()));
        }
        let scale_marginal = |m: &Marginal1D, s: f64| -> Result<Marginal1D> {
            match m {
                Marginal1D::FiniteSupport(f) => {
                    Marginal1D::finite(f.atoms().iter().map(|&(v, p)| (s * v, p)).collect())
                }
                Marginal1D::Gaussian { mean, variance } => Marginal1D::gaussian(s * mean, s * s * variance),
                Marginal1D::PowerNegativeTail(_) => Err(Error::InvalidArgument(
                    "power-tail marginals are not closed under scaling".into(),
                )),
            }
        };
        match self {
            IncrementDistribution::FiniteSupport2D(f) => Self::finite(
                f.atoms
                    .iter()
                    .map(|&(v, p)| ([scale[0] * v[0], scale[1] * v[1]], p))
                    .collect(),
            ),
            IncrementDistribution::BivariateGaussian(g) => {
                let [[c11, c12], [_, c22]] = g.covariance;
                let s = scale;
                Self::gaussian(
                    [s[0] * g.mean[0], s[1] * g.mean[1]],
                    [
                        [s[0] * s[0] * c11, s[0] * s[1] * c12],
                        [s[0] * s[1] * c12, s[1] * s[1] * c22],
                    ],
                )
            }
            IncrementDistribution::ProductOfMarginals { first, second } => Ok(Self::product(
                scale_marginal(first, scale[0])?,
                scale_marginal(second, scale[1])?,
            )),
        }
    }

    /// Coordinate-wise infimum of the support (`-∞` when unbounded).
    pub fn lower_bounds(&self) -> Point2 {
        let per = |m: &Marginal1D| match m {
            Marginal1D::FiniteSupport(f) => f.atoms().iter().map(|a| a.0).fold(f64::INFINITY, f64::min),
            _ => f64::NEG_INFINITY,
        };
        match self {
            IncrementDistribution::FiniteSupport2D(_) | IncrementDistribution::ProductOfMarginals { .. } => {
                [per(&self.marginal(0)), per(&self.marginal(1))]
            }
            IncrementDistribution::BivariateGaussian(g) => {
                let bound = |i: usize| {
                    if g.covariance[i][i] == 0.0 {
                        g.mean[i]
                    } else {
                        f64::NEG_INFINITY
                    }
                };
                [bound(0), bound(1)]
            }
        }
    }

    /// Coordinate-wise supremum of the support (`+∞` when unbounded).
    pub fn upper_bounds(&self) -> Point2 {
        let per = |m: &Marginal1D| match m {
            Marginal1D::FiniteSupport(f) => f.atoms().iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max),
            Marginal1D::Gaussian { mean, variance } if *variance == 0.0 => *mean,
            Marginal1D::PowerNegativeTail(p) => p.positive_atom(),
            _ => f64::INFINITY,
        };
        match self {
            IncrementDistribution::BivariateGaussian(g) => {
                let bound = |i: usize| {
                    if g.covariance[i][i] == 0.0 {
                        g.mean[i]
                    } else {
                        f64::INFINITY
                    }
                };
                [bound(0), bound(1)]
            }
            _ => [per(&self.marginal(0)), per(&self.marginal(1))],
        }
    }
}

fn covariance_is_singular(c11: f64, c12: f64, c22: f64) -> bool {
    if c11 <= 0.0 || c22 <= 0.0 {
        return true;
    }
    c11 * c22 - c12 * c12 <= 1e-12 * c11 * c22
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_product_moments() {
        let d = IncrementDistribution::symmetric_unit_product();
        let m = d.moments();
        assert_eq!(m.mean, [0.0, 0.0]);
        assert_eq!(m.covariance, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.rho, Some(0.0));
    }

    #[test]
    fn gaussian_rho_read_off() {
        let d = IncrementDistribution::gaussian([0.0, 0.0], [[1.0, -0.5], [-0.5, 1.0]]).unwrap();
        assert_eq!(d.moments().rho, Some(-0.5));
    }

    #[test]
    fn point_mass_always_same_draw() {
        let d = IncrementDistribution::finite(alloc::vec![([0.0, 0.0], 1.0)]).unwrap();
        let mut s = RngStream::new(1, 0);
        for _ in 0..50 {
            assert_eq!(d.sample(&mut s), [0.0, 0.0]);
        }
    }

    #[test]
    fn degenerate_coordinate_has_no_rho() {
        let d = IncrementDistribution::finite(alloc::vec![([1.0, 2.0], 0.5), ([-1.0, 2.0], 0.5)]).unwrap();
        assert_eq!(d.moments().rho, None);
    }

    #[test]
    fn non_psd_covariance_rejected() {
        assert!(IncrementDistribution::gaussian([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(IncrementDistribution::gaussian([0.0, 0.0], [[1.0, 0.2], [0.3, 1.0]]).is_err());
    }

    #[test]
    fn marginal_of_finite_merges_atoms() {
        let d = IncrementDistribution::symmetric_unit_product();
        let atoms = d.finite_atoms().unwrap();
        let joint = IncrementDistribution::finite(atoms).unwrap();
        match joint.marginal(1) {
            Marginal1D::FiniteSupport(f) => assert_eq!(f.atoms(), &[(1.0, 0.5), (-1.0, 0.5)]),
            other => panic!("unexpected marginal {other:?}"),
        }
    }
}
