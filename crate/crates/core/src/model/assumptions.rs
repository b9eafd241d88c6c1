use serde::Serialize;

use super::moments::Exactness;
use crate::quad::integrate;
use crate::special::{normal_cdf, normal_pdf};
use crate::Point2;

/// Outcome of the support checks: not constrained to a line, and
/// `P[X₁ > 0, X₂ > 0] > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// The support lies in an affine line.
    pub on_line: bool,
    /// `P[X₁ > 0, X₂ > 0]`.
    pub quadrant_probability: f64,
    pub quadrant_exactness: Exactness,
}

impl AssumptionReport {
    pub(crate) fn new(on_line: bool, quadrant_probability: f64, quadrant_exactness: Exactness) -> Self {
        Self {
            on_line,
            quadrant_probability,
            quadrant_exactness,
        }
    }

    pub fn not_on_line(&self) -> bool {
        !self.on_line
    }

    pub fn quadrant_positive(&self) -> bool {
        let slack = match self.quadrant_exactness {
            Exactness::Exact => 0.0,
            Exactness::Numerical { error_bound } => error_bound,
        };
        self.quadrant_probability > slack
    }

    pub fn holds(&self) -> bool {
        self.not_on_line() && self.quadrant_positive()
    }
}

const QUADRANT_TOLERANCE: f64 = 1e-8;

/// `P[X₁ > 0, X₂ > 0]` for a bivariate normal: product of error functions
/// when uncorrelated, otherwise a one-dimensional integral of the
/// conditional law of `X₂` given `X₁`.
pub(crate) fn gaussian_quadrant_probability(mean: Point2, cov: [[f64; 2]; 2]) -> (f64, Exactness) {
    let s1 = libm::sqrt(cov[0][0]);
    let s2 = libm::sqrt(cov[1][1]);
    let positive = |m: f64, s: f64| {
        if s == 0.0 {
            if m > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            normal_cdf(m / s)
        }
    };
    if s1 == 0.0 || s2 == 0.0 || cov[0][1] == 0.0 {
        return (positive(mean[0], s1) * positive(mean[1], s2), Exactness::Exact);
    }
    let rho = (cov[0][1] / (s1 * s2)).clamp(-1.0, 1.0);
    let a = mean[0] / s1;
    let b = mean[1] / s2;
    let lower = (-a).max(-40.0);
    if lower >= 40.0 {
        return (0.0, Exactness::Exact);
    }
    let complement = libm::sqrt((1.0 - rho * rho).max(0.0));
    let (p, _) = if complement < 1e-12 {
        // X₂ is an affine function of X₁.
        integrate(
            |z| if b + rho * z > 0.0 { normal_pdf(z) } else { 0.0 },
            lower,
            40.0,
            QUADRANT_TOLERANCE * 1e-2,
        )
    } else {
        integrate(
            |z| normal_pdf(z) * normal_cdf((b + rho * z) / complement),
            lower,
            40.0,
            QUADRANT_TOLERANCE * 1e-2,
        )
    };
    (
        p.clamp(0.0, 1.0),
        Exactness::Numerical {
            error_bound: QUADRANT_TOLERANCE,
        },
    )
}
