use lindley2d_core::model::{IncrementDistribution, RngStream};
use lindley2d_core::simulate::{
    coordinate_exit_time, dual_waiting_time, duality_deviation, exit_time_along, lindley_step, random_duality_trial,
    reflected_step, ExitTime,
};
use proptest::collection::vec;
use proptest::prelude::*;

fn lattice_increments() -> impl Strategy<Value = Vec<[f64; 2]>> {
    vec(
        [(-5i32..=5).prop_map(f64::from), (-5i32..=5).prop_map(f64::from)],
        0..120,
    )
}

fn real_increments() -> impl Strategy<Value = Vec<[f64; 2]>> {
    vec([-10.0f64..10.0, -10.0f64..10.0], 0..120)
}

fn recursion(increments: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut w = [0.0, 0.0];
    let mut out = vec![w];
    for &x in increments {
        w = lindley_step(w, x);
        out.push(w);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(256) })]

    #[test]
    fn duality_is_exact_on_lattice_prefixes(xs in lattice_increments()) {
        let path = recursion(&xs);
        for n in 0..=xs.len() {
            prop_assert_eq!(dual_waiting_time(&xs[..n]), path[n]);
        }
    }

    #[test]
    fn duality_within_relative_tolerance(xs in real_increments()) {
        let dev = duality_deviation(&xs);
        prop_assert!(dev.max_rel <= 1e-9, "{:?}", dev);
    }

    #[test]
    fn lindley_stays_in_closed_quadrant(xs in real_increments(), w0 in [0.0f64..20.0, 0.0f64..20.0]) {
        let mut w = w0;
        for &x in &xs {
            w = lindley_step(w, x);
            prop_assert!(w[0] >= 0.0 && w[1] >= 0.0);
        }
    }

    #[test]
    fn lindley_distance_never_grows(
        xs in real_increments(),
        a in [0.0f64..20.0, 0.0f64..20.0],
        b in [0.0f64..20.0, 0.0f64..20.0],
    ) {
        let (mut wa, mut wb) = (a, b);
        let mut gap = [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()];
        for &x in &xs {
            wa = lindley_step(wa, x);
            wb = lindley_step(wb, x);
            for i in 0..2 {
                let g = (wa[i] - wb[i]).abs();
                prop_assert!(g <= gap[i] + 1e-12);
                gap[i] = g;
            }
        }
    }

    #[test]
    fn exit_time_is_min_of_coordinate_exits(
        xs in real_increments(),
        start in [0.01f64..15.0, 0.01f64..15.0],
    ) {
        let horizon = xs.len().max(1) as u64;
        let joint = exit_time_along(start, xs.iter().copied(), horizon);
        let t1 = coordinate_exit_time(start[0], xs.iter().map(|x| x[0]), horizon);
        let t2 = coordinate_exit_time(start[1], xs.iter().map(|x| x[1]), horizon);
        let expected = match (t1.exited(), t2.exited()) {
            (Some(a), Some(b)) => ExitTime::Exited(a.min(b)),
            (Some(a), None) | (None, Some(a)) => ExitTime::Exited(a),
            (None, None) => joint.tau,
        };
        prop_assert_eq!(joint.tau, expected);
    }

    #[test]
    fn reflected_within_bound_for_bounded_increments(
        xs in vec([-2.0f64..=2.0, -2.0f64..=2.0], 0..200),
        start in [0.0f64..10.0, 0.0f64..10.0],
    ) {
        let (mut w, mut r) = (start, start);
        for &x in &xs {
            w = lindley_step(w, x);
            r = reflected_step(r, x);
            for i in 0..2 {
                prop_assert!(r[i] >= w[i] - 1e-12);
                prop_assert!(r[i] <= w[i] + 2.0 + 1e-12);
            }
        }
    }
}

#[test]
fn randomized_duality_trials_cover_both_kinds() {
    let mut lattice = 0;
    for i in 0..2000 {
        let t = random_duality_trial(99, i, 200);
        let d = duality_deviation(&t.increments);
        if t.lattice {
            lattice += 1;
            assert_eq!(d.max_abs, 0.0, "trial {i}");
        } else {
            assert!(d.max_rel <= 1e-9, "trial {i}: {d:?}");
        }
        assert!(t.increments.len() <= 200);
    }
    assert_eq!(lattice, 1000);
}

#[test]
fn reflected_bound_needs_increments_bounded_above() {
    // X ≥ −2 holds, yet one large step pushes R far above W + 2.
    let x = [10.0, 0.5];
    let w = lindley_step([0.0, 0.0], x);
    let r = reflected_step([0.0, 0.0], x);
    assert_eq!(w, [0.0, 0.0]);
    assert_eq!(r, [10.0, 0.5]);
    assert!(r[0] > w[0] + 2.0);
}

#[test]
fn same_stream_same_path() {
    let d = IncrementDistribution::symmetric_unit_product();
    let a: Vec<_> = {
        let mut s = RngStream::new(3, 17);
        (0..100).map(|_| d.sample(&mut s)).collect()
    };
    let b: Vec<_> = {
        let mut s = RngStream::new(3, 17);
        (0..100).map(|_| d.sample(&mut s)).collect()
    };
    assert_eq!(a, b);
}
