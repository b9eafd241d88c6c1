use lindley2d_core::model::{
    BivariateGaussian, IncrementDistribution, Marginal1D, MomentBound, PowerNegativeTail, RngStream,
};
use proptest::prelude::*;

const DRAWS: usize = 1_000_000;

/// Sample mean and its standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn check_sample_moments(dist: &IncrementDistribution, seed: u64) {
    let report = dist.moments();
    let mut stream = RngStream::new(seed, 0);
    let draws: Vec<[f64; 2]> = (0..DRAWS).map(|_| dist.sample(&mut stream)).collect();
    for i in 0..2 {
        let xs: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let (m, se) = mean_se(&xs);
        assert!(
            (m - report.mean[i]).abs() <= 5.0 * se,
            "mean {i}: {m} vs {}",
            report.mean[i]
        );
        let sq: Vec<f64> = xs.iter().map(|x| (x - report.mean[i]).powi(2)).collect();
        let (v, se) = mean_se(&sq);
        let want = report.covariance[i][i];
        assert!((v - want).abs() <= 5.0 * se, "variance {i}: {v} vs {want}");
    }
    let cross: Vec<f64> = draws
        .iter()
        .map(|d| (d[0] - report.mean[0]) * (d[1] - report.mean[1]))
        .collect();
    let (c, se) = mean_se(&cross);
    assert!(
        (c - report.covariance[0][1]).abs() <= 5.0 * se,
        "covariance: {c} vs {}",
        report.covariance[0][1]
    );
}

#[test]
fn finite_support_moments_match_samples() {
    let laws = [
        IncrementDistribution::symmetric_unit_product(),
        IncrementDistribution::finite(vec![([1.0, 2.0], 0.3), ([-2.0, 0.5], 0.2), ([0.5, -1.5], 0.5)]).unwrap(),
        IncrementDistribution::finite(vec![([1.0, 1.0], 0.25), ([-1.0, -1.0], 0.25), ([2.0, -3.0], 0.5)]).unwrap(),
    ];
    for (k, d) in laws.iter().enumerate() {
        check_sample_moments(d, 11 + k as u64);
    }
}

#[test]
fn gaussian_moments_match_samples() {
    let d = IncrementDistribution::gaussian([0.25, -0.5], [[2.0, -0.7], [-0.7, 1.5]]).unwrap();
    check_sample_moments(&d, 5);
}

#[test]
fn power_tail_moment_flags() {
    for beta in [2.5, 4.0, 5.5] {
        let t = PowerNegativeTail::with_mean(beta, 0.5, 0.0).unwrap();
        let m = Marginal1D::PowerNegativeTail(t).moments();
        assert_eq!(m.abs_moments, MomentBound::FiniteBelow(beta - 1.0));
        assert!(m.abs_moments.is_finite(beta - 1.0 - 1e-9));
        assert!(!m.abs_moments.is_finite(beta - 1.0));
    }
}

#[test]
fn power_tail_partial_sums_diverge_at_threshold() {
    let t = PowerNegativeTail::with_mean(4.0, 0.5, 0.0).unwrap();
    // r = β − 1: the partial sums grow like ln(terms) without bound.
    let sums: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| t.partial_neg_moment(3.0, n))
        .collect();
    let gains: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(gains.iter().all(|&g| g > 0.1), "{sums:?}");
    // Below the threshold the partial sums settle.
    let a = t.partial_neg_moment(2.5, 100_000);
    let b = t.partial_neg_moment(2.5, 1_000_000);
    assert!(b - a < 0.01 * b);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn rho_is_scale_invariant(
        rho in -0.95f64..0.95,
        s1 in 0.01f64..100.0,
        s2 in 0.01f64..100.0,
    ) {
        let g = IncrementDistribution::BivariateGaussian(BivariateGaussian::standard(rho).unwrap());
        let r0 = g.moments().rho.unwrap();
        let r1 = g.scaled([s1, s2]).unwrap().moments().rho.unwrap();
        prop_assert!((r0 - r1).abs() < 1e-12);

        let f = IncrementDistribution::finite(vec![([1.0, 2.0], 0.3), ([-2.0, 0.5], 0.2), ([0.5, -1.5], 0.5)]).unwrap();
        let r0 = f.moments().rho.unwrap();
        let r1 = f.scaled([s1, s2]).unwrap().moments().rho.unwrap();
        prop_assert!((r0 - r1).abs() < 1e-12);
    }
}
