//! Recurrence regime of the 2-D Lindley process and the predicted tail
//! exponent of the exit time from the quadrant.
//!
//! The four hypothesis sets are tested in order (a), (b), (c), (d); (a)
//! wins whenever it applies. Moment finiteness is read from the
//! [`MomentReport`] flags and never estimated from data.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::Serialize;

use crate::model::{AssumptionReport, Drift, MomentReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// Some coordinate has `E Xᵢ⁺ < E Xᵢ⁻ ≤ ∞`.
    #[serde(rename = "A_negative_drift")]
    NegativeDrift,
    /// Both coordinates have `E Xᵢ⁻ < E Xᵢ⁺ < ∞`.
    #[serde(rename = "B_positive_drift")]
    PositiveDrift,
    /// Both coordinates centered.
    #[serde(rename = "C_centered")]
    Centered,
    /// One coordinate centered, the other with positive drift.
    #[serde(rename = "D_mixed")]
    Mixed,
    #[serde(rename = "Unknown")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Transient,
    PositiveRecurrent,
    NullRecurrent,
    Unknown,
}

/// One named check that entered the decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub case_label: CaseLabel,
    pub verdict: Verdict,
    /// Exponent of `P[τₓ > n]` in the centered (`1/p`) and mixed (`1/2`)
    /// cases, when all moment hypotheses hold.
    pub tail_exponent: Option<f64>,
    pub required_moment_order: Option<f64>,
    /// In the mixed case, the index (0 or 1) of the centered coordinate.
    pub centered_coordinate: Option<usize>,
    pub rho: Option<f64>,
    pub delta: f64,
    /// A mean within rounding of zero was treated as exactly zero.
    pub assumed_centered: [bool; 2],
    pub hypotheses_met: Vec<Hypothesis>,
}

impl RegimeClassification {
    pub fn all_hypotheses_met(&self) -> bool {
        self.hypotheses_met.iter().all(|h| h.passed)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "correlation {rho} must lie strictly between -1 and 1"
        )))
    }
}

/// `1/p = π / (2 arccos(−ρ))`.
pub fn predicted_exponent(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(PI / (2.0 * libm::acos(-rho)))
}

/// `max{2 + δ, π / arccos(−ρ)}`.
pub fn required_moment_order(rho: f64, delta: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("delta {delta} must be positive")));
    }
    Ok((2.0 + delta).max(PI / libm::acos(-rho)))
}

struct Builder {
    out: RegimeClassification,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, passed: bool) -> bool {
        self.out.hypotheses_met.push(Hypothesis {
            name: name.into(),
            passed,
        });
        passed
    }

    fn first_failure(&self) -> String {
        self.out
            .hypotheses_met
            .iter()
            .find(|h| !h.passed)
            .map(|h| h.name.clone())
            .unwrap_or_default()
    }

    fn unknown(mut self, reason: impl Into<String>) -> RegimeClassification {
        self.out.case_label = CaseLabel::Unknown(reason.into());
        self.out.verdict = Verdict::Unknown;
        self.out.tail_exponent = None;
        self.out
    }
}

/// Applies the regime decision to a moment report.
///
/// Fails only for a non-positive `delta`; unmet hypotheses produce
/// [`CaseLabel::Unknown`] naming the first failing check.
pub fn classify_regime(
    report: &MomentReport,
    assumptions: &AssumptionReport,
    delta: f64,
) -> Result<RegimeClassification> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("delta {delta} must be positive")));
    }
    let mut b = Builder {
        out: RegimeClassification {
            case_label: CaseLabel::Unknown(String::new()),
            verdict: Verdict::Unknown,
            tail_exponent: None,
            required_moment_order: None,
            centered_coordinate: None,
            rho: report.rho,
            delta,
            assumed_centered: report.assumed_centered(),
            hypotheses_met: Vec::new(),
        },
    };

    let line_ok = b.check("support not on a line", assumptions.not_on_line());
    let quadrant_ok = b.check("P[X in open quadrant] > 0", assumptions.quadrant_positive());
    if !(line_ok && quadrant_ok) {
        let reason = b.first_failure();
        return Ok(b.unknown(reason));
    }

    let drifts = [report.drift(0), report.drift(1)];
    if let Some(i) = drifts.iter().position(|d| *d == Drift::Negative) {
        b.check(alloc::format!("E X{}+ < E X{}-", i + 1, i + 1), true);
        b.out.case_label = CaseLabel::NegativeDrift;
        b.out.verdict = Verdict::Transient;
        return Ok(b.out);
    }
    if let Some(i) = drifts.iter().position(|d| *d == Drift::Undefined) {
        b.check(alloc::format!("E X{}+ or E X{}- finite", i + 1, i + 1), false);
        return Ok(b.unknown(alloc::format!("drift of X{} undefined", i + 1)));
    }

    match drifts {
        [Drift::Positive, Drift::Positive] => {
            for i in 0..2 {
                b.check(
                    alloc::format!("E X{}+ < inf", i + 1),
                    report.marginals[i].pos_part_mean.is_finite(),
                );
            }
            if !b.out.all_hypotheses_met() {
                let reason = b.first_failure();
                return Ok(b.unknown(reason));
            }
            b.out.case_label = CaseLabel::PositiveDrift;
            b.out.verdict = Verdict::PositiveRecurrent;
            Ok(b.out)
        }
        [Drift::Centered, Drift::Centered] => {
            b.out.case_label = CaseLabel::Centered;
            let Some(rho) = report.rho else {
                b.check("correlation defined", false);
                return Ok(b.unknown("correlation undefined"));
            };
            if !b.check("|rho| < 1", rho.abs() < 1.0) {
                return Ok(b.unknown("|rho| = 1"));
            }
            let order = required_moment_order(rho, delta)?;
            b.out.required_moment_order = Some(order);
            for i in 0..2 {
                b.check(
                    alloc::format!("E|X{}|^{order} < inf", i + 1),
                    report.moment_order(i, order),
                );
            }
            if !b.out.all_hypotheses_met() {
                let reason = b.first_failure();
                return Ok(b.unknown(reason));
            }
            b.out.verdict = if rho >= 0.0 {
                Verdict::NullRecurrent
            } else {
                Verdict::Transient
            };
            b.out.tail_exponent = Some(predicted_exponent(rho)?);
            Ok(b.out)
        }
        _ => {
            let c = if drifts[0] == Drift::Centered { 0 } else { 1 };
            let d = 1 - c;
            b.out.case_label = CaseLabel::Mixed;
            b.out.centered_coordinate = Some(c);
            b.out.required_moment_order = Some(2.0 + delta);
            for i in [c, d] {
                b.check(
                    alloc::format!("E|X{}|^{} < inf", i + 1, 2.0 + delta),
                    report.moment_order(i, 2.0 + delta),
                );
            }
            b.check(
                alloc::format!("E[(X{}-)^{}] < inf", d + 1, 3.0 + delta),
                report.neg_moment_order(d, 3.0 + delta),
            );
            if !b.out.all_hypotheses_met() {
                let reason = b.first_failure();
                return Ok(b.unknown(reason));
            }
            b.out.verdict = Verdict::NullRecurrent;
            b.out.tail_exponent = Some(0.5);
            Ok(b.out)
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Verdict::Transient => "Transient",
            Verdict::PositiveRecurrent => "PositiveRecurrent",
            Verdict::NullRecurrent => "NullRecurrent",
            Verdict::Unknown => "Unknown",
        })
    }
}

impl core::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CaseLabel::NegativeDrift => f.write_str("A_negative_drift"),
            CaseLabel::PositiveDrift => f.write_str("B_positive_drift"),
            CaseLabel::Centered => f.write_str("C_centered"),
            CaseLabel::Mixed => f.write_str("D_mixed"),
            CaseLabel::Unknown(r) => write!(f, "Unknown({r})"),
        }
    }
}

impl CaseLabel {
    pub fn is_unknown(&self) -> bool {
        matches!(self, CaseLabel::Unknown(_))
    }

    pub fn reason(&self) -> Option<String> {
        match self {
            CaseLabel::Unknown(r) => Some(r.to_string()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BivariateGaussian, IncrementDistribution, Marginal1D, PowerNegativeTail};
    use crate::DEFAULT_DELTA;
    use alloc::vec;

    fn classify(d: &IncrementDistribution) -> RegimeClassification {
        classify_regime(&d.moments(), &d.check_assumptions(), DEFAULT_DELTA).unwrap()
    }

    #[test]
    fn exponent_examples() {
        assert!((predicted_exponent(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((predicted_exponent(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((predicted_exponent(-0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!(predicted_exponent(1.0).is_err());
        assert!(predicted_exponent(-1.0).is_err());
    }

    #[test]
    fn moment_order_examples() {
        assert!((required_moment_order(0.0, 0.1).unwrap() - 2.1).abs() < 1e-15);
        assert!((required_moment_order(-0.5, 0.1).unwrap() - 3.0).abs() < 1e-14);
        // arccos(0.9) = 0.45102681179626236
        let expected = PI / 0.451_026_811_796_262_4;
        assert!((required_moment_order(-0.9, 0.1).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 6.965).abs() < 0.01);
    }

    #[test]
    fn case_a() {
        let d = IncrementDistribution::gaussian([-0.5, 0.3], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = classify(&d);
        assert_eq!(c.case_label, CaseLabel::NegativeDrift);
        assert_eq!(c.verdict, Verdict::Transient);
        assert_eq!(c.tail_exponent, None);
    }

    #[test]
    fn case_b() {
        let d = IncrementDistribution::gaussian([0.5, 0.3], [[1.0, 0.2], [0.2, 1.0]]).unwrap();
        assert_eq!(classify(&d).verdict, Verdict::PositiveRecurrent);
    }

    #[test]
    fn case_c_negative_rho() {
        let d = IncrementDistribution::BivariateGaussian(BivariateGaussian::standard(-0.5).unwrap());
        let c = classify(&d);
        assert_eq!(c.case_label, CaseLabel::Centered);
        assert_eq!(c.verdict, Verdict::Transient);
        assert!((c.tail_exponent.unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn case_c_nonnegative_rho() {
        let c = classify(&IncrementDistribution::symmetric_unit_product());
        assert_eq!(c.verdict, Verdict::NullRecurrent);
        assert_eq!(c.tail_exponent, Some(1.0));
    }

    fn case_d_law() -> IncrementDistribution {
        IncrementDistribution::product(
            Marginal1D::symmetric_unit(),
            Marginal1D::finite(vec![(1.0, 0.75), (-1.0, 0.25)]).unwrap(),
        )
    }

    #[test]
    fn case_d() {
        let c = classify(&case_d_law());
        assert_eq!(c.case_label, CaseLabel::Mixed);
        assert_eq!(c.verdict, Verdict::NullRecurrent);
        assert_eq!(c.tail_exponent, Some(0.5));
        assert_eq!(c.centered_coordinate, Some(0));
    }

    #[test]
    fn case_d_swapped() {
        let a = classify(&case_d_law());
        let b = classify(&case_d_law().swapped());
        assert_eq!(b.centered_coordinate, Some(1));
        assert_eq!(
            (a.case_label, a.verdict, a.tail_exponent),
            (b.case_label, b.verdict, b.tail_exponent)
        );
    }

    #[test]
    fn case_d_heavy_negative_tail_is_unknown() {
        // E[(X2-)^r] finite iff r < 3: fails the 3 + delta requirement.
        let tail = PowerNegativeTail::with_mean(4.0, 0.3, 1.0).unwrap();
        let d = IncrementDistribution::product(Marginal1D::symmetric_unit(), Marginal1D::PowerNegativeTail(tail));
        let c = classify(&d);
        assert!(c.case_label.is_unknown());
        assert_eq!(c.verdict, Verdict::Unknown);
        assert!(c.case_label.reason().unwrap().contains("X2-"));
    }

    #[test]
    fn case_d_light_negative_tail_passes() {
        let tail = PowerNegativeTail::with_mean(5.5, 0.3, 1.0).unwrap();
        let d = IncrementDistribution::product(Marginal1D::symmetric_unit(), Marginal1D::PowerNegativeTail(tail));
        assert_eq!(classify(&d).verdict, Verdict::NullRecurrent);
    }

    #[test]
    fn failed_assumption_is_unknown() {
        let d = IncrementDistribution::finite(vec![([-1.0, 1.0], 0.5), ([1.0, -1.0], 0.5)]).unwrap();
        let c = classify(&d);
        assert!(c.case_label.is_unknown());
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert!(classify_regime(&d.moments(), &d.check_assumptions(), 0.0).is_err());
    }
}
