use serde::Serialize;

use crate::{Point2, CENTERED_TOLERANCE};

/// Which absolute moments `E|Y|^r` are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "snake_case")]
pub enum MomentBound {
    AllFinite,
    /// Finite exactly for `r < threshold`.
    FiniteBelow(f64),
}

impl MomentBound {
    pub fn is_finite(&self, r: f64) -> bool {
        match self {
            MomentBound::AllFinite => true,
            MomentBound::FiniteBelow(t) => r < *t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Numerical { error_bound: f64 },
}

impl Exactness {
    pub(crate) fn worst(self, other: Exactness) -> Exactness {
        match (self, other) {
            (Exactness::Exact, e) | (e, Exactness::Exact) => e,
            (Exactness::Numerical { error_bound: a }, Exactness::Numerical { error_bound: b }) => {
                Exactness::Numerical { error_bound: a.max(b) }
            }
        }
    }
}

/// Sign of a coordinate's drift, as used by the regime classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    /// `E X⁺ < E X⁻ ≤ ∞`.
    Negative,
    Centered,
    /// `E X⁻ < E X⁺`.
    Positive,
    /// Both parts infinite.
    Undefined,
}

/// Moments of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalMoments {
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
    /// `E X⁺`.
    pub pos_part_mean: f64,
    /// `E X⁻`.
    pub neg_part_mean: f64,
    /// `E[(X⁻)²]`.
    pub neg_part_second_moment: f64,
    pub abs_moments: MomentBound,
    pub neg_moments: MomentBound,
    pub exactness: Exactness,
    /// The computed mean was within rounding of zero and was set to zero.
    pub assumed_centered: bool,
}

impl MarginalMoments {
    pub(crate) fn snap_mean(&mut self) {
        if self.mean != 0.0 && self.mean.abs() < CENTERED_TOLERANCE {
            self.mean = 0.0;
            self.assumed_centered = true;
        }
    }

    pub fn drift(&self) -> Drift {
        let (pos, neg) = (self.pos_part_mean, self.neg_part_mean);
        if pos.is_infinite() && neg.is_infinite() {
            Drift::Undefined
        } else if neg.is_infinite() {
            Drift::Negative
        } else if pos.is_infinite() {
            Drift::Positive
        } else if self.mean == 0.0 {
            Drift::Centered
        } else if self.mean < 0.0 {
            Drift::Negative
        } else {
            Drift::Positive
        }
    }
}

/// Moments of `X = (X₁, X₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub marginals: [MarginalMoments; 2],
    pub mean: Point2,
    pub covariance: [[f64; 2]; 2],
    /// Correlation `ρ(X₁, X₂)`; `None` when a variance is zero or infinite.
    pub rho: Option<f64>,
    pub neg_part_second_moment: Point2,
    pub exactness: Exactness,
}

impl MomentReport {
    pub(crate) fn from_parts(marginals: [MarginalMoments; 2], covariance12: f64) -> Self {
        let [m1, m2] = marginals;
        let v1 = m1.variance;
        let v2 = m2.variance;
        let rho = if v1 > 0.0 && v2 > 0.0 && v1.is_finite() && v2.is_finite() {
            Some((covariance12 / libm::sqrt(v1 * v2)).clamp(-1.0, 1.0))
        } else {
            None
        };
        Self {
            marginals,
            mean: [m1.mean, m2.mean],
            covariance: [[v1, covariance12], [covariance12, v2]],
            rho,
            neg_part_second_moment: [m1.neg_part_second_moment, m2.neg_part_second_moment],
            exactness: m1.exactness.worst(m2.exactness),
        }
    }

    /// Is `E|Xᵢ|^r` finite? (`i` is 0 or 1.)
    pub fn moment_order(&self, i: usize, r: f64) -> bool {
        self.marginals[i].abs_moments.is_finite(r)
    }

    /// Is `E[(Xᵢ⁻)^r]` finite?
    pub fn neg_moment_order(&self, i: usize, r: f64) -> bool {
        self.marginals[i].neg_moments.is_finite(r)
    }

    pub fn drift(&self, i: usize) -> Drift {
        self.marginals[i].drift()
    }

    pub fn assumed_centered(&self) -> [bool; 2] {
        [self.marginals[0].assumed_centered, self.marginals[1].assumed_centered]
    }
}
