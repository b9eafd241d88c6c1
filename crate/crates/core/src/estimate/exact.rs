use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::model::{IncrementDistribution, Marginal1D};
use crate::{Error, Point2, Result};

/// Default cap on the number of cells of the dense 2-D state grid.
pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;

/// `P[τₓ > n]` for `n = 0, …, n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTail {
    pub start: Point2,
    /// `survival[n] = P[τₓ > n]`.
    pub survival: Vec<f64>,
}

/// First integer displacement `j` with `x + j > 0`.
fn first_alive(x: f64) -> i64 {
    libm::floor(-x) as i64 + 1
}

/// Exact survival probabilities for a finite-support law on the integer
/// lattice, by forward propagation of the killed walk's distribution over
/// displacements from `x` (which need not be integer).
pub fn exact_tail_lattice(dist: &IncrementDistribution, x: Point2, n_max: usize, budget: usize) -> Result<ExactTail> {
    if !(x[0] > 0.0 && x[1] > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "start {x:?} must lie in the open quadrant"
        )));
    }
    let atoms = dist.lattice_atoms().ok_or(Error::NotLattice)?;
    let lo = [first_alive(x[0]), first_alive(x[1])];
    let up = [0, 1].map(|i| atoms.iter().map(|a| a.0[i].max(0)).max().unwrap_or(0));
    // displacement j ranges over [lo, n_max·up]
    let width = [0, 1].map(|i| (n_max as i64 * up[i] - lo[i] + 1) as usize);
    let cells = width[0].saturating_mul(width[1]);
    if cells > budget {
        return Err(Error::BudgetExceeded { cells, budget });
    }
    let idx = |j: [i64; 2]| ((j[0] - lo[0]) as usize) * width[1] + (j[1] - lo[1]) as usize;
    let mut cur = vec![0.0f64; cells];
    let mut next = vec![0.0f64; cells];
    cur[idx([0, 0])] = 1.0;
    let mut survival = Vec::with_capacity(n_max + 1);
    survival.push(1.0);
    // bounding box of the support at the current step
    let (mut bmin, mut bmax) = ([0i64, 0], [0i64, 0]);
    for _ in 0..n_max {
        let (mut nmin, mut nmax) = ([i64::MAX; 2], [i64::MIN; 2]);
        for j0 in bmin[0]..=bmax[0] {
            for j1 in bmin[1]..=bmax[1] {
                let p = cur[idx([j0, j1])];
                if p == 0.0 {
                    continue;
                }
                for &(a, q) in &atoms {
                    let t = [j0 + a[0], j1 + a[1]];
                    if t[0] < lo[0] || t[1] < lo[1] {
                        continue;
                    }
                    next[idx(t)] += p * q;
                    for i in 0..2 {
                        nmin[i] = nmin[i].min(t[i]);
                        nmax[i] = nmax[i].max(t[i]);
                    }
                }
            }
        }
        for j0 in bmin[0]..=bmax[0] {
            for j1 in bmin[1]..=bmax[1] {
                cur[idx([j0, j1])] = 0.0;
            }
        }
        core::mem::swap(&mut cur, &mut next);
        if nmin[0] == i64::MAX {
            survival.push(0.0);
            // nothing left alive
            while survival.len() <= n_max {
                survival.push(0.0);
            }
            break;
        }
        bmin = nmin;
        bmax = nmax;
        let mut total = 0.0;
        for j0 in bmin[0]..=bmax[0] {
            for j1 in bmin[1]..=bmax[1] {
                total += cur[idx([j0, j1])];
            }
        }
        survival.push(total);
    }
    Ok(ExactTail { start: x, survival })
}

/// One-dimensional version of [`exact_tail_lattice`], linear in the state
/// count per step.
pub fn exact_tail_1d(marginal: &Marginal1D, x: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("start {x} must be positive")));
    }
    let Marginal1D::FiniteSupport(f) = marginal else {
        return Err(Error::NotLattice);
    };
    if !f.is_integer_valued() {
        return Err(Error::NotLattice);
    }
    let atoms: Vec<(i64, f64)> = f.atoms().iter().map(|&(v, p)| (v as i64, p)).collect();
    let lo = first_alive(x);
    let up = atoms.iter().map(|a| a.0.max(0)).max().unwrap_or(0);
    let width = (n_max as i64 * up - lo + 1) as usize;
    let mut cur = vec![0.0f64; width];
    let mut next = vec![0.0f64; width];
    cur[(-lo) as usize] = 1.0;
    let (mut bmin, mut bmax) = (0i64, 0i64);
    let mut survival = Vec::with_capacity(n_max + 1);
    survival.push(1.0);
    for _ in 0..n_max {
        let (mut nmin, mut nmax) = (i64::MAX, i64::MIN);
        for j in bmin..=bmax {
            let p = cur[(j - lo) as usize];
            if p == 0.0 {
                continue;
            }
            for &(a, q) in &atoms {
                let t = j + a;
                if t >= lo {
                    next[(t - lo) as usize] += p * q;
                    nmin = nmin.min(t);
                    nmax = nmax.max(t);
                }
            }
        }
        for j in bmin..=bmax {
            cur[(j - lo) as usize] = 0.0;
        }
        core::mem::swap(&mut cur, &mut next);
        if nmin == i64::MAX {
            survival.resize(n_max + 1, 0.0);
            break;
        }
        bmin = nmin;
        bmax = nmax;
        survival.push(cur[(bmin - lo) as usize..=(bmax - lo) as usize].iter().sum());
    }
    Ok(survival)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_walk_small_n() {
        let s = exact_tail_1d(&Marginal1D::symmetric_unit(), 1.0, 4).unwrap();
        assert_eq!(s, vec![1.0, 0.5, 0.5, 0.375, 0.375]);
    }

    #[test]
    fn product_walk_is_square() {
        let d = IncrementDistribution::symmetric_unit_product();
        let two = exact_tail_lattice(&d, [1.0, 1.0], 10, DEFAULT_CELL_BUDGET).unwrap();
        let one = exact_tail_1d(&Marginal1D::symmetric_unit(), 1.0, 10).unwrap();
        assert_eq!(two.survival[2], 0.25);
        for n in 0..=10 {
            assert_eq!(two.survival[n], one[n] * one[n]);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert!(matches!(
            exact_tail_lattice(&d, [1.0, 1.0], 1000, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn n_zero_is_one() {
        let d = IncrementDistribution::symmetric_unit_product();
        assert_eq!(exact_tail_lattice(&d, [3.0, 1.0], 0, 10).unwrap().survival, vec![1.0]);
    }

    #[test]
    fn rejects_gaussian() {
        let d = IncrementDistribution::gaussian([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            exact_tail_lattice(&d, [1.0, 1.0], 3, 100),
            Err(Error::NotLattice)
        ));
    }

    #[test]
    fn deterministic_descent_dies() {
        let d = IncrementDistribution::finite(vec![([-1.0, -1.0], 1.0)]).unwrap();
        let s = exact_tail_lattice(&d, [2.5, 2.5], 5, 100).unwrap();
        assert_eq!(s.survival, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }
}
