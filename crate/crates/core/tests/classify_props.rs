use lindley2d_core::classify::{classify_regime, predicted_exponent, CaseLabel, Verdict};
use lindley2d_core::model::{BivariateGaussian, IncrementDistribution, Marginal1D};
use lindley2d_core::DEFAULT_DELTA;
use proptest::prelude::*;

fn classify(d: &IncrementDistribution) -> lindley2d_core::classify::RegimeClassification {
    classify_regime(&d.moments(), &d.check_assumptions(), DEFAULT_DELTA).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(128) })]

    #[test]
    fn exponent_decreases_in_rho(a in -0.99f64..0.99, b in -0.99f64..0.99) {
        prop_assume!(a < b);
        prop_assert!(predicted_exponent(a).unwrap() > predicted_exponent(b).unwrap());
    }

    #[test]
    fn centered_verdict_matches_exponent(rho in -0.95f64..0.95) {
        prop_assume!(rho.abs() > 1e-9);
        let c = classify(&IncrementDistribution::BivariateGaussian(BivariateGaussian::standard(rho).unwrap()));
        prop_assert_eq!(&c.case_label, &CaseLabel::Centered);
        let p = c.tail_exponent.unwrap();
        prop_assert_eq!(c.verdict == Verdict::Transient, p > 1.0);
        prop_assert_eq!(c.verdict == Verdict::NullRecurrent, p <= 1.0);
        prop_assert_eq!(p > 1.0, rho < 0.0);
    }

    #[test]
    fn centered_classification_is_scale_invariant(
        rho in -0.9f64..0.9,
        s1 in 0.05f64..20.0,
        s2 in 0.05f64..20.0,
    ) {
        let g = IncrementDistribution::BivariateGaussian(BivariateGaussian::standard(rho).unwrap());
        let a = classify(&g);
        let b = classify(&g.scaled([s1, s2]).unwrap());
        prop_assert_eq!(&a.case_label, &b.case_label);
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert!((a.tail_exponent.unwrap() - b.tail_exponent.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn mixed_classification_is_swap_invariant(p_up in 0.55f64..0.95, v in 0.1f64..4.0) {
        let d = IncrementDistribution::product(
            Marginal1D::gaussian(0.0, v).unwrap(),
            Marginal1D::finite(vec![(1.0, p_up), (-1.0, 1.0 - p_up)]).unwrap(),
        );
        let a = classify(&d);
        let b = classify(&d.swapped());
        prop_assert_eq!(&a.case_label, &CaseLabel::Mixed);
        prop_assert_eq!(&a.case_label, &b.case_label);
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.tail_exponent, b.tail_exponent);
        prop_assert_eq!(a.centered_coordinate, Some(0));
        prop_assert_eq!(b.centered_coordinate, Some(1));
    }
}

#[test]
fn negative_drift_wins_over_everything() {
    let d = IncrementDistribution::product(
        Marginal1D::finite(vec![(1.0, 0.25), (-1.0, 0.75)]).unwrap(),
        Marginal1D::finite(vec![(1.0, 0.9), (-1.0, 0.1)]).unwrap(),
    );
    let c = classify(&d);
    assert_eq!(c.case_label, CaseLabel::NegativeDrift);
    assert_eq!(c.verdict, Verdict::Transient);
}
