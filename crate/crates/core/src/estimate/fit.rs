use alloc::vec::Vec;

use serde::Serialize;

use super::survival::{SurvivalCurve, Z_95};
use crate::{Error, Result};

/// Points with fewer surviving paths are excluded from fits.
pub const MIN_SURVIVORS: u64 = 30;

/// Range of `n` used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWindow {
    /// `[n_max/100, n_max]`, dropping points with fewer than
    /// [`MIN_SURVIVORS`] survivors.
    Default,
    /// All grid points in `[n_min, n_max]`; each must have at least
    /// [`MIN_SURVIVORS`] survivors.
    Explicit { n_min: u64, n_max: u64 },
}

/// Weighted least squares fit of `ln P[τ > n] = intercept + slope·ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Grid points actually used.
    pub window: (u64, u64),
    pub r_squared: f64,
    pub points: usize,
    /// `−slope`.
    pub exponent: f64,
    /// `exp(intercept)`.
    pub prefactor: f64,
}

fn insufficient(curve: &SurvivalCurve, n: u64) -> Error {
    let i = curve.n_grid.partition_point(|&m| m < n).min(curve.n_grid.len() - 1);
    let survivors = curve.survivors[i];
    let required_paths = if survivors == 0 {
        curve.paths.saturating_mul(MIN_SURVIVORS)
    } else {
        (curve.paths as f64 * MIN_SURVIVORS as f64 / survivors as f64).ceil() as u64
    };
    Error::InsufficientSurvivors {
        n: curve.n_grid[i],
        survivors,
        required_paths,
    }
}

/// Fits the tail exponent on a window of the curve. Weights are the
/// inverse widths of the log-scale Wilson intervals.
pub fn fit_tail_exponent(curve: &SurvivalCurve, window: FitWindow) -> Result<ExponentFit> {
    let n_max = *curve
        .n_grid
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty curve".into()))?;
    let idx: Vec<usize> = match window {
        FitWindow::Default => {
            let lo = n_max / 100;
            let all: Vec<usize> = (0..curve.n_grid.len()).filter(|&i| curve.n_grid[i] >= lo).collect();
            let kept: Vec<usize> = all
                .iter()
                .copied()
                .filter(|&i| curve.survivors[i] >= MIN_SURVIVORS)
                .collect();
            if kept.len() < 3 {
                return Err(insufficient(curve, n_max));
            }
            kept
        }
        FitWindow::Explicit { n_min, n_max } => {
            let all: Vec<usize> = (0..curve.n_grid.len())
                .filter(|&i| curve.n_grid[i] >= n_min && curve.n_grid[i] <= n_max)
                .collect();
            if all.len() < 3 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "window [{n_min}, {n_max}] contains fewer than 3 grid points"
                )));
            }
            if let Some(&i) = all.iter().find(|&&i| curve.survivors[i] < MIN_SURVIVORS) {
                return Err(insufficient(curve, curve.n_grid[i]));
            }
            all
        }
    };

    let xs: Vec<f64> = idx.iter().map(|&i| libm::log(curve.n_grid[i] as f64)).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| libm::log(curve.estimates[i])).collect();
    let widths: Vec<f64> = idx
        .iter()
        .map(|&i| libm::log(curve.ci_high[i]) - libm::log(curve.ci_low[i]))
        .collect();
    let ws: Vec<f64> = widths.iter().map(|w| 1.0 / w).collect();
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..xs.len() {
        let (dx, dy) = (xs[k] - xbar, ys[k] - ybar);
        sxx += ws[k] * dx * dx;
        sxy += ws[k] * dx * dy;
        syy += ws[k] * dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("window has no spread in n".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ssr = 0.0;
    let mut sandwich = 0.0;
    for k in 0..xs.len() {
        let r = ys[k] - intercept - slope * xs[k];
        ssr += ws[k] * r * r;
        let sigma = widths[k] / (2.0 * Z_95);
        let dx = xs[k] - xbar;
        sandwich += ws[k] * ws[k] * dx * dx * sigma * sigma;
    }
    let residual_var = ssr / (xs.len() as f64 - 2.0) / sxx;
    let stderr = libm::sqrt(residual_var.max(sandwich / (sxx * sxx)));
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        window: (curve.n_grid[idx[0]], curve.n_grid[*idx.last().unwrap()]),
        r_squared: if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 },
        points: idx.len(),
        exponent: -slope,
        prefactor: libm::exp(intercept),
    })
}

/// Check that `P[τ > n]·n^r` does not grow along the window: the constant
/// `c` is fitted at the first window point and every later estimate must
/// satisfy `P[τ > n] ≤ c·n^{−r}`, strictly at the last point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub r: f64,
    pub c: f64,
    pub window: (u64, u64),
    /// `max_n P[τ > n]·n^r / c` over the window after the first point.
    pub max_ratio: f64,
    pub final_ratio: f64,
    pub passed: bool,
}

pub fn decay_check(curve: &SurvivalCurve, r: f64, n_min: u64, n_max: u64) -> Result<DecayCheck> {
    let idx: Vec<usize> = (0..curve.n_grid.len())
        .filter(|&i| curve.n_grid[i] >= n_min && curve.n_grid[i] <= n_max)
        .collect();
    if idx.len() < 2 {
        return Err(Error::InvalidArgument(
            "decay window needs at least two grid points".into(),
        ));
    }
    let first = idx[0];
    let scaled = |i: usize| curve.estimates[i] * libm::pow(curve.n_grid[i] as f64, r);
    let c = scaled(first);
    if !(c > 0.0) {
        return Err(insufficient(curve, curve.n_grid[first]));
    }
    let max_ratio = idx[1..]
        .iter()
        .map(|&i| scaled(i) / c)
        .fold(f64::NEG_INFINITY, f64::max);
    let final_ratio = scaled(*idx.last().unwrap()) / c;
    Ok(DecayCheck {
        r,
        c,
        window: (curve.n_grid[first], curve.n_grid[*idx.last().unwrap()]),
        max_ratio,
        final_ratio,
        passed: max_ratio <= 1.0 && final_ratio < 1.0,
    })
}

/// Check that the estimate at `n_far` lies in the confidence interval of
/// the estimate at `n_ref`, and that the latter is bounded away from 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatTailCheck {
    pub n_ref: u64,
    pub n_far: u64,
    pub ref_estimate: f64,
    pub ref_ci: (f64, f64),
    pub far_estimate: f64,
    pub passed: bool,
}

pub fn flat_tail_check(curve: &SurvivalCurve, n_ref: u64, n_far: u64) -> Result<FlatTailCheck> {
    let missing = |n| Error::InvalidArgument(alloc::format!("n = {n} is not on the curve's grid"));
    let i = curve.index_of(n_ref).ok_or_else(|| missing(n_ref))?;
    let j = curve.index_of(n_far).ok_or_else(|| missing(n_far))?;
    let ref_ci = (curve.ci_low[i], curve.ci_high[i]);
    let far = curve.estimates[j];
    Ok(FlatTailCheck {
        n_ref,
        n_far,
        ref_estimate: curve.estimates[i],
        ref_ci,
        far_estimate: far,
        passed: ref_ci.0 > 0.0 && far >= ref_ci.0 && far <= ref_ci.1,
    })
}
