use alloc::vec::Vec;

use serde::Serialize;

use crate::model::{IncrementDistribution, RngStream};
use crate::{Error, Point2, Result};

/// `W(n) = max{0, W(n−1) − X(n)}`, coordinate-wise.
#[inline]
pub fn lindley_step(w: Point2, x: Point2) -> Point2 {
    [(w[0] - x[0]).max(0.0), (w[1] - x[1]).max(0.0)]
}

/// `R(n) = |R(n−1) − X(n)|`, coordinate-wise.
#[inline]
pub fn reflected_step(r: Point2, x: Point2) -> Point2 {
    [(r[0] - x[0]).abs(), (r[1] - x[1]).abs()]
}

fn check_closed_quadrant(p: Point2, what: &str) -> Result<()> {
    if p.iter().all(|c| *c >= 0.0 && c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "{what} {p:?} must lie in the closed quadrant"
        )))
    }
}

/// `W(0), …, W(n)` with fresh increments from `stream`.
pub fn lindley_path(dist: &IncrementDistribution, w0: Point2, n: usize, stream: &mut RngStream) -> Result<Vec<Point2>> {
    check_closed_quadrant(w0, "initial state")?;
    let mut out = Vec::with_capacity(n + 1);
    let mut w = w0;
    out.push(w);
    for _ in 0..n {
        w = lindley_step(w, dist.sample(stream));
        out.push(w);
    }
    Ok(out)
}

/// `R(0), …, R(len)` driven by the given increments.
pub fn reflected_path(r0: Point2, increments: &[Point2]) -> Result<Vec<Point2>> {
    check_closed_quadrant(r0, "initial state")?;
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut r = r0;
    out.push(r);
    for &x in increments {
        r = reflected_step(r, x);
        out.push(r);
    }
    Ok(out)
}

/// A stored path of the free walk with its running extrema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkPath {
    /// `X(1), …, X(n)`.
    pub increments: Vec<Point2>,
    /// `S(0) = 0, S(1), …, S(n)`.
    pub partial_sums: Vec<Point2>,
    /// `min_{k ≤ n} Sᵢ(k)`.
    pub running_min: Vec<Point2>,
    /// `max_{k ≤ n} Sᵢ(k)`.
    pub running_max: Vec<Point2>,
}

impl WalkPath {
    pub fn from_increments(increments: Vec<Point2>) -> Self {
        let n = increments.len();
        let mut partial_sums = Vec::with_capacity(n + 1);
        let mut running_min = Vec::with_capacity(n + 1);
        let mut running_max = Vec::with_capacity(n + 1);
        let mut s = [0.0, 0.0];
        let mut lo = s;
        let mut hi = s;
        partial_sums.push(s);
        running_min.push(lo);
        running_max.push(hi);
        for x in &increments {
            s = [s[0] + x[0], s[1] + x[1]];
            lo = [lo[0].min(s[0]), lo[1].min(s[1])];
            hi = [hi[0].max(s[0]), hi[1].max(s[1])];
            partial_sums.push(s);
            running_min.push(lo);
            running_max.push(hi);
        }
        Self {
            increments,
            partial_sums,
            running_min,
            running_max,
        }
    }

    pub fn simulate(dist: &IncrementDistribution, n: usize, stream: &mut RngStream) -> Self {
        Self::from_increments((0..n).map(|_| dist.sample(stream)).collect())
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub s: Point2,
    pub w: Point2,
    pub r: Point2,
}

/// Free walk, Lindley process and reflected walk driven by the same
/// increments, the latter two started at `start`.
pub fn trajectory(
    dist: &IncrementDistribution,
    start: Point2,
    n: usize,
    stream: &mut RngStream,
) -> Result<Vec<TrajectoryRow>> {
    check_closed_quadrant(start, "start")?;
    let mut rows = Vec::with_capacity(n + 1);
    let (mut s, mut w, mut r) = ([0.0, 0.0], start, start);
    rows.push(TrajectoryRow { n: 0, s, w, r });
    for k in 1..=n {
        let x = dist.sample(stream);
        s = [s[0] + x[0], s[1] + x[1]];
        w = lindley_step(w, x);
        r = reflected_step(r, x);
        rows.push(TrajectoryRow { n: k, s, w, r });
    }
    Ok(rows)
}

/// Comparison of the reflected walk with the Lindley process on one shared
/// path: the largest value of `Rᵢ(n) − Wᵢ(n)` and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectedComparison {
    pub max_excess: f64,
    pub at_step: usize,
    pub coordinate: usize,
    /// `Rᵢ(n) ≥ Wᵢ(n)` held at every step.
    pub reflected_dominates: bool,
}

impl ReflectedComparison {
    /// Runs `W` and `R` from `start` along the same `steps` increments.
    pub fn run(dist: &IncrementDistribution, start: Point2, steps: usize, stream: &mut RngStream) -> Result<Self> {
        check_closed_quadrant(start, "start")?;
        let (mut w, mut r) = (start, start);
        let mut out = ReflectedComparison {
            max_excess: f64::NEG_INFINITY,
            at_step: 0,
            coordinate: 0,
            reflected_dominates: true,
        };
        for k in 1..=steps {
            let x = dist.sample(stream);
            w = lindley_step(w, x);
            r = reflected_step(r, x);
            for i in 0..2 {
                let excess = r[i] - w[i];
                if excess < 0.0 {
                    out.reflected_dominates = false;
                }
                if excess > out.max_excess {
                    out.max_excess = excess;
                    out.at_step = k;
                    out.coordinate = i;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lindley_step_examples() {
        assert_eq!(lindley_step([3.0, 1.0], [1.0, -2.0]), [2.0, 3.0]);
        assert_eq!(lindley_step([0.0, 0.0], [5.0, 5.0]), [0.0, 0.0]);
        assert_eq!(lindley_step([1.0, 2.0], [3.0, 1.0]), [0.0, 1.0]);
    }

    #[test]
    fn reflected_step_examples() {
        assert_eq!(reflected_step([1.0, 2.0], [3.0, 1.0]), [2.0, 1.0]);
        assert_eq!(reflected_step([0.0, 0.0], [-2.0, -3.0]), [2.0, 3.0]);
        assert_eq!(reflected_step([4.5, 0.25], [0.0, 0.0]), [4.5, 0.25]);
    }

    #[test]
    fn lindley_path_zero_length() {
        let d = IncrementDistribution::symmetric_unit_product();
        let p = lindley_path(&d, [1.0, 2.0], 0, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(p, vec![[1.0, 2.0]]);
    }

    #[test]
    fn lindley_path_point_mass_decay() {
        let d = IncrementDistribution::finite(vec![([1.0, 1.0], 1.0)]).unwrap();
        let p = lindley_path(&d, [3.0, 2.0], 5, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(p[1..], [[2.0, 1.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn lindley_path_rejects_negative_start() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert!(lindley_path(&d, [-1.0, 0.0], 3, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn walk_path_extrema() {
        let p = WalkPath::from_increments(vec![[1.0, -1.0], [-3.0, 2.0], [1.0, 1.0]]);
        assert_eq!(p.partial_sums, vec![[0.0, 0.0], [1.0, -1.0], [-2.0, 1.0], [-1.0, 2.0]]);
        assert_eq!(p.running_min[3], [-2.0, -1.0]);
        assert_eq!(p.running_max[3], [1.0, 2.0]);
    }
}
