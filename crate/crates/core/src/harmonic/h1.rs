use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{BiasBound, EstimateMethod, HarmonicEstimate, LyapunovSpec};
use crate::chunk::{ChunkRunner, PathExperiment};
use crate::linalg::BandMatrix;
use crate::model::{Marginal1D, RngStream};
use crate::{Error, Result};

fn require_centered(marginal: &Marginal1D) -> Result<()> {
    let m = marginal.moments();
    if m.mean != 0.0 {
        return Err(Error::NotCentered { mean: m.mean });
    }
    if !m.variance.is_finite() {
        return Err(Error::InvalidArgument("variance must be finite".into()));
    }
    Ok(())
}

struct H1Experiment<'a> {
    marginal: &'a Marginal1D,
    x: f64,
    horizon: u64,
    master_seed: u64,
    lyapunov: &'a LyapunovSpec,
}

#[derive(Debug, Clone, Copy, Default)]
struct H1Partial {
    sum: f64,
    sum_sq: f64,
    censored: u64,
    bound_sum: f64,
}

impl PathExperiment for H1Experiment<'_> {
    type Partial = H1Partial;
    type Output = (f64, f64, f64, f64);

    fn run_chunk(&self, range: Range<u64>) -> H1Partial {
        let mut acc = H1Partial::default();
        for i in range {
            let mut stream = RngStream::new(self.master_seed, i);
            let mut pos = self.x;
            let mut exited = false;
            for _ in 0..self.horizon {
                pos += self.marginal.sample(&mut stream);
                if pos <= 0.0 {
                    exited = true;
                    break;
                }
            }
            if exited {
                acc.sum += pos;
                acc.sum_sq += pos * pos;
            } else {
                acc.censored += 1;
                acc.bound_sum += self.lyapunov.overshoot_bound(pos);
            }
        }
        acc
    }

    fn combine(&self, a: H1Partial, b: H1Partial) -> H1Partial {
        H1Partial {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            censored: a.censored + b.censored,
            bound_sum: a.bound_sum + b.bound_sum,
        }
    }

    fn finish(&self, t: H1Partial, paths: u64) -> (f64, f64, f64, f64) {
        let n = paths as f64;
        let mean = t.sum / n;
        let var = (t.sum_sq / n - mean * mean).max(0.0);
        (mean, libm::sqrt(var / n), t.censored as f64 / n, t.bound_sum / n)
    }
}

/// Monte Carlo estimate of `h₁(x) = x − E[x + S(τₓ); τₓ < ∞]`.
///
/// Paths alive at `horizon` contribute zero overshoot. The omitted terms
/// are non-positive, so the estimate is biased low; the reported bound
/// `above` is the average of `A·m(y) + R` over censored end points `y`,
/// which dominates `−g₁(y)`.
pub fn h1_estimate<R: ChunkRunner>(
    marginal: &Marginal1D,
    x: f64,
    horizon: u64,
    paths: u64,
    master_seed: u64,
    runner: &R,
) -> Result<HarmonicEstimate> {
    require_centered(marginal)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("start {x} must be positive")));
    }
    if horizon == 0 || paths == 0 {
        return Err(Error::InvalidArgument("horizon and paths must be positive".into()));
    }
    let lyapunov = LyapunovSpec::build(marginal)?;
    let exp = H1Experiment {
        marginal,
        x,
        horizon,
        master_seed,
        lyapunov: &lyapunov,
    };
    let (mean_overshoot, se, censored, bound) = runner.run(&exp, paths);
    Ok(HarmonicEstimate {
        point: vec![x],
        value: x - mean_overshoot,
        stat_error: se,
        truncation_bias_bound: Some(BiasBound {
            below: 0.0,
            above: bound,
        }),
        method: EstimateMethod::MonteCarlo {
            horizon,
            paths,
            master_seed,
        },
        censored_fraction: Some(censored),
        violation: None,
    })
}

/// Solution of the killed-walk harmonicity equations on `{1, …, L}` with
/// closure `h₁(y) = y` for `y > L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeH1 {
    atoms: Vec<(i64, f64)>,
    /// `values[y − 1] = h₁(y)`.
    values: Vec<f64>,
    lyapunov: LyapunovSpec,
    max_jump: i64,
}

impl LatticeH1 {
    pub fn solve(marginal: &Marginal1D, truncation: usize) -> Result<Self> {
        require_centered(marginal)?;
        let Marginal1D::FiniteSupport(f) = marginal else {
            return Err(Error::NotLattice);
        };
        if !f.is_integer_valued() {
            return Err(Error::NotLattice);
        }
        let atoms: Vec<(i64, f64)> = f.atoms().iter().map(|&(v, p)| (v as i64, p)).collect();
        let lower = atoms.iter().map(|a| (-a.0).max(0)).max().unwrap_or(0) as usize;
        let upper = atoms.iter().map(|a| a.0.max(0)).max().unwrap_or(0) as usize;
        if truncation < 2 * (lower + upper).max(1) {
            return Err(Error::InvalidArgument(alloc::format!(
                "truncation {truncation} is too small for jumps of size {}",
                lower.max(upper)
            )));
        }
        let lyapunov = LyapunovSpec::build(marginal)?;
        let l = truncation as i64;
        let mut matrix = BandMatrix::zeros(truncation, lower, upper);
        let mut rhs = vec![0.0; truncation];
        for y in 1..=l {
            let row = (y - 1) as usize;
            matrix.add(row, row, 1.0);
            for &(v, p) in &atoms {
                let t = y + v;
                if t <= 0 {
                    continue;
                }
                if t > l {
                    rhs[row] += p * t as f64;
                } else {
                    matrix.add(row, (t - 1) as usize, -p);
                }
            }
        }
        let values = matrix.solve(&rhs)?;
        Ok(Self {
            atoms,
            values,
            lyapunov,
            max_jump: upper as i64,
        })
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    /// `h₁(x)`; the value is constant on `(k − 1, k]`.
    pub fn value(&self, x: f64) -> Result<f64> {
        let k = libm::ceil(x);
        if !(x > 0.0) || k > self.values.len() as f64 {
            return Err(Error::InvalidArgument(alloc::format!(
                "point {x} outside (0, {}]",
                self.values.len()
            )));
        }
        Ok(self.values[k as usize - 1])
    }

    fn extended(&self, y: i64) -> f64 {
        if y <= 0 {
            0.0
        } else if y as usize > self.values.len() {
            y as f64
        } else {
            self.values[(y - 1) as usize]
        }
    }

    /// `h₁(y) − E[h₁(y + X); y + X > 0]` with the closure beyond `L`.
    pub fn residual(&self, y: i64) -> f64 {
        let expect: f64 = self.atoms.iter().map(|&(v, p)| p * self.extended(y + v)).sum();
        self.extended(y) - expect
    }

    /// Largest absolute residual over `1..=upto`.
    pub fn max_residual(&self, upto: usize) -> f64 {
        (1..=upto.min(self.values.len()) as i64)
            .map(|y| self.residual(y).abs())
            .fold(0.0, f64::max)
    }

    /// `d = min_{x ∈ (0, 1]} h₁(x) = h₁(1)`.
    pub fn d(&self) -> f64 {
        self.values[0]
    }

    /// Upper bound on `h₁(x) − (computed value)`: the closure undervalues
    /// `h₁` beyond `L` by at most `A·m(y) + R`, and the walk reaches
    /// `(L, ∞)` before being killed with probability at most `h₁(x)/L ≤
    /// V(x)/L`.
    pub fn truncation_bias(&self, x: f64) -> f64 {
        let l = self.values.len() as f64;
        self.lyapunov.overshoot_bound(l + self.max_jump as f64) * self.lyapunov.v(x) / l
    }

    pub fn estimate(&self, x: f64) -> Result<HarmonicEstimate> {
        Ok(HarmonicEstimate {
            point: vec![x],
            value: self.value(x)?,
            stat_error: 0.0,
            truncation_bias_bound: Some(BiasBound {
                below: 0.0,
                above: self.truncation_bias(x),
            }),
            method: EstimateMethod::LatticeExact {
                truncation: self.values.len(),
            },
            censored_fraction: None,
            violation: None,
        })
    }
}

/// `h₁(x)` for an integer-valued centered law by a banded linear solve.
pub fn h1_exact_lattice(marginal: &Marginal1D, x: f64, truncation: usize) -> Result<HarmonicEstimate> {
    LatticeH1::solve(marginal, truncation)?.estimate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::Sequential;

    fn three_point() -> Marginal1D {
        Marginal1D::finite(vec![(1.0, 2.0 / 3.0), (-2.0, 1.0 / 3.0)]).unwrap()
    }

    #[test]
    fn unit_walk_is_identity() {
        let s = LatticeH1::solve(&Marginal1D::symmetric_unit(), 200).unwrap();
        for x in 1..=100 {
            assert!((s.value(x as f64).unwrap() - x as f64).abs() < 1e-9);
        }
        assert!((s.value(0.4).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_point_matches_closed_form() {
        // h₁(x) = x + (1 − (−1/2)^x)/3 on positive integers.
        let s = LatticeH1::solve(&three_point(), 2000).unwrap();
        for x in 1..=50 {
            let exact = x as f64 + (1.0 - libm::pow(-0.5, x as f64)) / 3.0;
            let got = s.value(x as f64).unwrap();
            let gap = exact - got;
            assert!(
                gap > -1e-9 && gap <= s.truncation_bias(x as f64) + 1e-9,
                "x = {x}: {got} vs {exact}"
            );
        }
        assert!(s.max_residual(500) < 1e-10);
    }

    #[test]
    fn truncation_error_shrinks_with_l() {
        let exact = 1.5;
        let coarse = exact - LatticeH1::solve(&three_point(), 1000).unwrap().value(1.0).unwrap();
        let fine = exact - LatticeH1::solve(&three_point(), 10_000).unwrap().value(1.0).unwrap();
        assert!(fine > 0.0 && fine < coarse / 5.0);
    }

    #[test]
    fn monte_carlo_unit_walk_has_no_overshoot() {
        let e = h1_estimate(&Marginal1D::symmetric_unit(), 3.0, 1000, 2000, 5, &Sequential).unwrap();
        assert_eq!(e.value, 3.0);
        assert_eq!(e.stat_error, 0.0);
    }

    #[test]
    fn rejects_non_lattice_and_uncentered() {
        assert!(matches!(
            LatticeH1::solve(&Marginal1D::gaussian(0.0, 1.0).unwrap(), 100),
            Err(Error::NotLattice)
        ));
        let drift = Marginal1D::finite(vec![(1.0, 0.6), (-1.0, 0.4)]).unwrap();
        assert!(matches!(LatticeH1::solve(&drift, 100), Err(Error::NotCentered { .. })));
        assert!(h1_estimate(&drift, 1.0, 10, 10, 0, &Sequential).is_err());
    }
}
