use alloc::string::ToString;
use alloc::vec;
use core::ops::Range;

use serde::Serialize;

use super::{BiasBound, EstimateMethod, HarmonicEstimate, LyapunovSpec};
use crate::chunk::{ChunkRunner, PathExperiment};
use crate::classify::{classify_regime, CaseLabel};
use crate::model::{IncrementDistribution, RngStream};
use crate::simulate::{exit_time_along, ExitTime};
use crate::{Error, Point2, Result, DEFAULT_DELTA};

struct H2dExperiment<'a> {
    dist: &'a IncrementDistribution,
    x: Point2,
    horizon: u64,
    master_seed: u64,
    lyapunov: &'a LyapunovSpec,
}

#[derive(Debug, Clone, Copy, Default)]
struct H2dPartial {
    sum: f64,
    sum_sq: f64,
    censored: u64,
    censored_first: f64,
    bound_sum: f64,
}

impl PathExperiment for H2dExperiment<'_> {
    type Partial = H2dPartial;
    type Output = H2dPartial;

    fn run_chunk(&self, range: Range<u64>) -> H2dPartial {
        let mut acc = H2dPartial::default();
        for i in range {
            let mut stream = RngStream::new(self.master_seed, i);
            let r = exit_time_along(
                self.x,
                core::iter::repeat_with(|| self.dist.sample(&mut stream)),
                self.horizon,
            );
            match r.tau {
                ExitTime::Exited(_) => {
                    let o = r.overshoot1.unwrap_or(0.0);
                    acc.sum += o;
                    acc.sum_sq += o * o;
                }
                ExitTime::Censored(_) => {
                    let y1 = r.final_position[0];
                    acc.censored += 1;
                    acc.censored_first += y1;
                    acc.bound_sum += self.lyapunov.overshoot_bound(y1);
                }
            }
        }
        acc
    }

    fn combine(&self, a: H2dPartial, b: H2dPartial) -> H2dPartial {
        H2dPartial {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            censored: a.censored + b.censored,
            censored_first: a.censored_first + b.censored_first,
            bound_sum: a.bound_sum + b.bound_sum,
        }
    }

    fn finish(&self, total: H2dPartial, _paths: u64) -> H2dPartial {
        total
    }
}

/// Monte Carlo estimate of `h(x) = x₁ − E[x₁ + S₁(τₓ); τₓ < ∞]` for a
/// mixed-drift law, where `x₁` is the centered coordinate.
///
/// If the centered coordinate is the second one, coordinates are swapped
/// internally; `x` is always given in the original order. Censored paths
/// contribute zero. For a censored end point `y`, the omitted term
/// `y₁ − h(y)` lies in `[−(A·m(y₁) + R), y₁]`, which gives the reported
/// two-sided bias bound.
pub fn h2d_estimate<R: ChunkRunner>(
    dist: &IncrementDistribution,
    x: Point2,
    horizon: u64,
    paths: u64,
    master_seed: u64,
    runner: &R,
) -> Result<HarmonicEstimate> {
    let class = classify_regime(&dist.moments(), &dist.check_assumptions(), DEFAULT_DELTA)?;
    if class.case_label != CaseLabel::Mixed {
        return Err(Error::WrongRegime {
            expected: CaseLabel::Mixed.to_string(),
            found: class.case_label.to_string(),
        });
    }
    if !(x[0] > 0.0 && x[1] > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "start {x:?} must lie in the open quadrant"
        )));
    }
    if horizon == 0 || paths == 0 {
        return Err(Error::InvalidArgument("horizon and paths must be positive".into()));
    }
    let (oriented, start) = if class.centered_coordinate == Some(1) {
        (dist.swapped(), [x[1], x[0]])
    } else {
        (dist.clone(), x)
    };
    let lyapunov = LyapunovSpec::build(&oriented.marginal(0))?;
    let exp = H2dExperiment {
        dist: &oriented,
        x: start,
        horizon,
        master_seed,
        lyapunov: &lyapunov,
    };
    let t = runner.run(&exp, paths);
    let n = paths as f64;
    let mean = t.sum / n;
    let se = libm::sqrt((t.sum_sq / n - mean * mean).max(0.0) / n);
    let value = start[0] - mean;
    let violation = (value < -3.0 * se).then(|| alloc::format!("h(x) = {value} is negative beyond 3 standard errors"));
    Ok(HarmonicEstimate {
        point: vec![x[0], x[1]],
        value,
        stat_error: se,
        truncation_bias_bound: Some(BiasBound {
            below: t.censored_first / n,
            above: t.bound_sum / n,
        }),
        method: EstimateMethod::MonteCarlo {
            horizon,
            paths,
            master_seed,
        },
        censored_fraction: Some(t.censored as f64 / n),
        violation,
    })
}

/// `h(x) − E[h(x + X); x + X ∈ open quadrant]` with the expectation taken
/// over the atoms of a finite-support law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicResidual {
    pub point: Point2,
    pub value: f64,
    pub expectation: f64,
    pub residual: f64,
    /// Combined standard error, treating the estimates as independent.
    pub sigma: f64,
    /// `residual / sigma` (zero when both vanish).
    pub z: f64,
}

pub fn one_step_residual<F>(atoms: &[(Point2, f64)], x: Point2, mut h: F) -> Result<HarmonicResidual>
where
    F: FnMut(Point2) -> Result<HarmonicEstimate>,
{
    let centre = h(x)?;
    let mut expectation = 0.0;
    let mut var = centre.stat_error * centre.stat_error;
    for &(a, p) in atoms {
        let y = [x[0] + a[0], x[1] + a[1]];
        if y[0] > 0.0 && y[1] > 0.0 {
            let e = h(y)?;
            expectation += p * e.value;
            var += p * p * e.stat_error * e.stat_error;
        }
    }
    let residual = centre.value - expectation;
    let sigma = libm::sqrt(var);
    Ok(HarmonicResidual {
        point: x,
        value: centre.value,
        expectation,
        residual,
        sigma,
        z: if sigma > 0.0 {
            residual / sigma
        } else if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(residual)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Sequential;
    use crate::model::Marginal1D;

    fn mixed() -> IncrementDistribution {
        IncrementDistribution::product(
            Marginal1D::symmetric_unit(),
            Marginal1D::finite(vec![(1.0, 0.75), (-1.0, 0.25)]).unwrap(),
        )
    }

    #[test]
    fn rejects_other_regimes() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert!(matches!(
            h2d_estimate(&d, [1.0, 1.0], 10, 10, 0, &Sequential),
            Err(Error::WrongRegime { .. })
        ));
    }

    #[test]
    fn bounded_by_h1_and_nonnegative() {
        let e = h2d_estimate(&mixed(), [2.0, 1.0], 2000, 20_000, 3, &Sequential).unwrap();
        assert!(e.value >= 0.0 && e.violation.is_none());
        assert!(e.value <= 2.0 + 3.0 * e.stat_error);
    }

    #[test]
    fn swap_invariant() {
        let a = h2d_estimate(&mixed(), [2.0, 3.0], 500, 4096, 9, &Sequential).unwrap();
        let b = h2d_estimate(&mixed().swapped(), [3.0, 2.0], 500, 4096, 9, &Sequential).unwrap();
        assert_eq!(a.value, b.value);
    }
}
