//! The superharmonic function `V(x) = x + A·m(x) + R` of the killed 1-D
//! walk, built from the negative part of a centered increment law:
//!
//! - `a(x) = ∫ₓ^∞ F(−t) dt = E[(X⁻ − x)⁺]`
//! - `b(x) = ∫ₓ^∞ a = E[((X⁻ − x)⁺)²] / 2`
//! - `m(x) = ∫₀ˣ b`
//! - `ā(x) = ∫ₓ^∞ P[X > t] dt`
//!
//! with `A = 4 / E[(X⁻)²]`, `x₀` the root of `2A·b(x/2) = 1`, and
//! `R = 3E(X⁻)/F(−x₀)` (or `3x₀` when `F(−x₀) = 0`).

use alloc::vec::Vec;

use serde::Serialize;

use crate::model::{Marginal1D, PowerNegativeTail};
use crate::quad::integrate;
use crate::special::{normal_cdf, normal_pdf};
use crate::{Error, Result};

/// Absolute tolerance for quadrature-based evaluations.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Bisection tolerance for `x₀`.
pub const ROOT_TOLERANCE: f64 = 1e-10;

const GAUSSIAN_TAIL_SIGMAS: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    /// Atoms `(value, probability)`.
    Finite(Vec<(f64, f64)>),
    Power(PowerNegativeTail),
    Gaussian {
        mean: f64,
        sigma: f64,
    },
}

/// `m` integrand weight for `X⁻ = u`: `∫₀ˣ ((u − y)⁺)²/2 dy`.
#[inline]
fn m_weight(u: f64, x: f64) -> f64 {
    if u <= x {
        u * u * u / 6.0
    } else {
        x * (3.0 * u * u - 3.0 * u * x + x * x) / 6.0
    }
}

impl Kernel {
    /// `F(−x) = P[X ≤ −x]`.
    fn neg_tail(&self, x: f64) -> f64 {
        match self {
            Kernel::Finite(atoms) => atoms.iter().filter(|(v, _)| *v <= -x).map(|(_, p)| p).sum(),
            Kernel::Power(p) => Marginal1D::PowerNegativeTail(*p).cdf(-x),
            Kernel::Gaussian { mean, sigma } => normal_cdf((-x - mean) / sigma),
        }
    }

    /// Upper end of the support of `X⁻` for quadrature purposes.
    fn neg_cutoff(&self) -> f64 {
        match self {
            Kernel::Gaussian { mean, sigma } => (-mean).max(0.0) + GAUSSIAN_TAIL_SIGMAS * sigma,
            _ => f64::INFINITY,
        }
    }

    /// Sum `Σ_{k > x} w_k (k − x)^j` style quantities for the power tail,
    /// expressed through tail power sums `T_j = Σ_{k ≥ K} w_k k^j`.
    fn power_tails(p: &PowerNegativeTail, x: f64) -> (u64, [f64; 3]) {
        // first k with k > x
        let k0 = (libm::floor(x) as u64) + 1;
        (
            k0,
            [
                p.tail_power_sum(0.0, k0),
                p.tail_power_sum(1.0, k0),
                p.tail_power_sum(2.0, k0),
            ],
        )
    }

    fn a(&self, x: f64) -> f64 {
        match self {
            Kernel::Finite(atoms) => atoms.iter().map(|&(v, p)| p * (-v - x).max(0.0)).sum(),
            Kernel::Power(p) => {
                let (_, t) = Self::power_tails(p, x);
                (t[1] - x * t[0]).max(0.0)
            }
            Kernel::Gaussian { .. } => {
                let hi = self.neg_cutoff();
                if x >= hi {
                    return 0.0;
                }
                integrate(|t| self.neg_tail(t), x, hi, QUADRATURE_TOLERANCE).0
            }
        }
    }

    fn b(&self, x: f64) -> f64 {
        match self {
            Kernel::Finite(atoms) => {
                atoms
                    .iter()
                    .map(|&(v, p)| {
                        let e = (-v - x).max(0.0);
                        p * e * e
                    })
                    .sum::<f64>()
                    / 2.0
            }
            Kernel::Power(p) => {
                let (_, t) = Self::power_tails(p, x);
                ((t[2] - 2.0 * x * t[1] + x * x * t[0]) / 2.0).max(0.0)
            }
            Kernel::Gaussian { .. } => {
                let hi = self.neg_cutoff();
                if x >= hi {
                    return 0.0;
                }
                integrate(|t| (t - x) * self.neg_tail(t), x, hi, QUADRATURE_TOLERANCE).0
            }
        }
    }

    fn m(&self, x: f64) -> f64 {
        match self {
            Kernel::Finite(atoms) => atoms.iter().map(|&(v, p)| p * m_weight((-v).max(0.0), x)).sum(),
            Kernel::Power(p) => {
                let (k0, t) = Self::power_tails(p, x);
                let head: f64 = (1..k0).map(|k| p.weight(k) * m_weight(k as f64, x)).sum();
                head + x * (3.0 * t[2] - 3.0 * x * t[1] + x * x * t[0]) / 6.0
            }
            Kernel::Gaussian { .. } => {
                let hi = self.neg_cutoff();
                let mid = x.min(hi);
                let inner = if mid > 0.0 {
                    integrate(|t| self.neg_tail(t) * t * t / 2.0, 0.0, mid, QUADRATURE_TOLERANCE).0
                } else {
                    0.0
                };
                let outer = if x < hi {
                    integrate(
                        |t| self.neg_tail(t) * (t * x - x * x / 2.0),
                        x,
                        hi,
                        QUADRATURE_TOLERANCE,
                    )
                    .0
                } else {
                    0.0
                };
                inner + outer
            }
        }
    }

    fn a_bar(&self, x: f64) -> f64 {
        match self {
            Kernel::Finite(atoms) => atoms.iter().map(|&(v, p)| p * (v - x).max(0.0)).sum(),
            Kernel::Power(p) => (1.0 - p.neg_mass()) * (p.positive_atom() - x).max(0.0),
            Kernel::Gaussian { mean, sigma } => {
                let hi = mean.max(0.0) + GAUSSIAN_TAIL_SIGMAS * sigma;
                if x >= hi {
                    return 0.0;
                }
                integrate(|t| normal_cdf((mean - t) / sigma), x, hi, QUADRATURE_TOLERANCE).0
            }
        }
    }
}

/// The constants `A`, `x₀`, `R` with evaluators for `a`, `b`, `m`, `ā`,
/// `V` and the one-step drift `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovSpec {
    #[serde(rename = "A")]
    pub a_coef: f64,
    pub x0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// `E(X⁻)`.
    pub neg_part_mean: f64,
    /// `E[(X⁻)²]`.
    pub neg_part_second_moment: f64,
    /// `F(−x₀)`.
    pub tail_at_x0: f64,
    /// Which rule selected `R`.
    pub r_rule: RRule,
    #[serde(skip)]
    kernel: Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RRule {
    /// `F(−x₀) > 0`: `R = 3E(X⁻)/F(−x₀)`.
    NegPartOverTail,
    /// `F(−x₀) = 0`: `R = 3x₀`.
    ThreeX0,
}

impl LyapunovSpec {
    /// Builds the spec for a centered law with finite variance and a
    /// non-trivial negative part.
    pub fn build(marginal: &Marginal1D) -> Result<Self> {
        let mom = marginal.moments();
        if mom.mean != 0.0 {
            return Err(Error::NotCentered { mean: mom.mean });
        }
        if !mom.variance.is_finite() {
            return Err(Error::InvalidArgument("variance must be finite".into()));
        }
        if !(mom.neg_part_second_moment > 0.0) {
            return Err(Error::InvalidArgument("negative part must not vanish".into()));
        }
        let kernel = match marginal {
            Marginal1D::FiniteSupport(f) => Kernel::Finite(f.atoms().to_vec()),
            Marginal1D::PowerNegativeTail(p) => Kernel::Power(*p),
            Marginal1D::Gaussian { mean, variance } => Kernel::Gaussian {
                mean: *mean,
                sigma: libm::sqrt(*variance),
            },
        };
        let a_coef = 4.0 / mom.neg_part_second_moment;
        let f = |x: f64| 2.0 * a_coef * kernel.b(x / 2.0) - 1.0;
        let x0 = bisect_decreasing(f)?;
        let tail_at_x0 = kernel.neg_tail(x0);
        let (r, r_rule) = if tail_at_x0 > 0.0 {
            (3.0 * mom.neg_part_mean / tail_at_x0, RRule::NegPartOverTail)
        } else {
            (3.0 * x0, RRule::ThreeX0)
        };
        Ok(Self {
            a_coef,
            x0,
            r,
            neg_part_mean: mom.neg_part_mean,
            neg_part_second_moment: mom.neg_part_second_moment,
            tail_at_x0,
            r_rule,
            kernel,
        })
    }

    pub fn a(&self, x: f64) -> f64 {
        self.kernel.a(x)
    }

    pub fn b(&self, x: f64) -> f64 {
        self.kernel.b(x)
    }

    pub fn m(&self, x: f64) -> f64 {
        self.kernel.m(x)
    }

    pub fn a_bar(&self, x: f64) -> f64 {
        self.kernel.a_bar(x)
    }

    /// `F(−x) = P[X ≤ −x]`, the probability of being killed from `x`.
    pub fn kill_probability(&self, x: f64) -> f64 {
        self.kernel.neg_tail(x)
    }

    /// `V(x) = x + A·m(x) + R`.
    pub fn v(&self, x: f64) -> f64 {
        x + self.a_coef * self.m(x) + self.r
    }

    /// `V(x) − x`, an upper bound for `−g₁(x) = h₁(x) − x`.
    pub fn overshoot_bound(&self, x: f64) -> f64 {
        self.a_coef * self.m(x) + self.r
    }

    /// `Δ(x) = E[V(x + X); x + X > 0] − V(x)`, evaluated as
    /// `E[X + A(m(x+X) − m(x)); x + X > 0] − F(−x)·V(x)` to avoid
    /// cancelling the large terms `x + R`.
    pub fn delta(&self, x: f64) -> f64 {
        let mx = self.m(x);
        let vx = x + self.a_coef * mx + self.r;
        let step = |y: f64| y + self.a_coef * (self.m(x + y) - mx);
        match &self.kernel {
            Kernel::Finite(atoms) => {
                let mut alive = 0.0;
                let mut killed = 0.0;
                for &(v, p) in atoms {
                    if x + v > 0.0 {
                        alive += p * step(v);
                    } else {
                        killed += p;
                    }
                }
                alive - killed * vx
            }
            Kernel::Power(p) => {
                let c = p.positive_atom();
                let mut alive = (1.0 - p.neg_mass()) * step(c);
                let mut k = 1u64;
                while (k as f64) < x {
                    alive += p.weight(k) * step(-(k as f64));
                    k += 1;
                }
                alive - self.kernel.neg_tail(x) * vx
            }
            Kernel::Gaussian { mean, sigma } => {
                let hi = mean + GAUSSIAN_TAIL_SIGMAS * sigma;
                let alive = if hi > -x {
                    integrate(
                        |y| step(y) * normal_pdf((y - mean) / sigma) / sigma,
                        -x,
                        hi,
                        QUADRATURE_TOLERANCE,
                    )
                    .0
                } else {
                    0.0
                };
                alive - self.kernel.neg_tail(x) * vx
            }
        }
    }

    /// One tabulated row.
    pub fn row(&self, x: f64) -> LyapunovRow {
        LyapunovRow {
            x,
            a: self.a(x),
            b: self.b(x),
            m: self.m(x),
            a_bar: self.a_bar(x),
            v: self.v(x),
            delta: self.delta(x),
        }
    }
}

/// Largest-`x` end of a bisection bracket for the root of a continuous
/// non-increasing `f` with `f(0) > 0`; the returned point has `f ≤ 0`.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let f0 = f(0.0);
    if !(f0 > 0.0) {
        return Err(Error::Bracket(alloc::format!("f(0) = {f0} is not positive")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Bracket("no sign change found".into()));
        }
    }
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Values of `a`, `b`, `m`, `ā`, `V` and `Δ` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovRow {
    pub x: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub a_bar: f64,
    pub v: f64,
    pub delta: f64,
}

/// Outcome of evaluating `Δ` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperharmonicReport {
    pub spec: LyapunovSpec,
    pub rows: Vec<LyapunovRow>,
    pub max_delta: f64,
    pub argmax: f64,
    pub tolerance: f64,
    /// Grid points with `Δ(x) > tolerance`.
    pub violations: Vec<f64>,
    /// `a`, `b` non-increasing and `m` non-decreasing along the grid.
    pub monotone: bool,
    pub passed: bool,
}

/// Evaluates `Δ(x) ≤ tolerance` and the monotonicity of `a`, `b`, `m` on
/// a sorted grid.
pub fn superharmonic_check(spec: &LyapunovSpec, grid: &[f64], tolerance: f64) -> Result<SuperharmonicReport> {
    if grid.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "grid points must be finite and non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be sorted".into()));
    }
    let rows: Vec<LyapunovRow> = grid.iter().map(|&x| spec.row(x)).collect();
    let (mut max_delta, mut argmax) = (f64::NEG_INFINITY, f64::NAN);
    for r in &rows {
        if r.delta > max_delta {
            max_delta = r.delta;
            argmax = r.x;
        }
    }
    let violations: Vec<f64> = rows.iter().filter(|r| r.delta > tolerance).map(|r| r.x).collect();
    let slack = 4.0 * QUADRATURE_TOLERANCE;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].a <= w[0].a + slack && w[1].b <= w[0].b + slack && w[1].m + slack >= w[0].m);
    Ok(SuperharmonicReport {
        spec: spec.clone(),
        max_delta,
        argmax,
        tolerance,
        passed: violations.is_empty() && monotone,
        violations,
        monotone,
        rows,
    })
}

/// `0, step, 2·step, …` up to and including `end` (within rounding).
pub fn uniform_grid(end: f64, step: f64) -> Vec<f64> {
    let n = libm::round(end / step) as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}
