use core::ops::Range;

use serde::Serialize;

use crate::chunk::{ChunkRunner, PathExperiment};
use crate::model::{Marginal1D, RngStream};
use crate::{Error, Result};

/// Step budget per attempt at reaching the first strict descending
/// ladder epoch.
pub const DEFAULT_LADDER_HORIZON: u64 = 1_000_000;

const MAX_RESAMPLES: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderSample {
    /// `S(ℓ₁) < 0`.
    pub height: f64,
    /// `ℓ₁`.
    pub epoch: u64,
    /// Attempts discarded because `ℓ₁` exceeded the horizon.
    pub resamples: u32,
}

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

fn ladder_unchecked(marginal: &Marginal1D, stream: &mut RngStream, horizon: u64) -> Result<LadderSample> {
    for resamples in 0..=MAX_RESAMPLES {
        let mut s = 0.0;
        for n in 1..=horizon {
            s += marginal.sample(stream);
            if s < 0.0 {
                return Ok(LadderSample {
                    height: s,
                    epoch: n,
                    resamples,
                });
            }
        }
    }
    Err(Error::InvalidArgument(alloc::format!(
        "no descending ladder epoch within {MAX_RESAMPLES} attempts of {horizon} steps"
    )))
}

/// Simulates to the first strict descending ladder epoch and returns the
/// ladder height. Attempts that exceed `horizon` steps are discarded and
/// redrawn from the continuing stream.
pub fn ladder_height_sample(marginal: &Marginal1D, stream: &mut RngStream, horizon: u64) -> Result<LadderSample> {
    require_centered(marginal)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    ladder_unchecked(marginal, stream, horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialEstimate {
    pub x: f64,
    /// Estimate of `U(x) = Σ_{k ≥ 0} P[S(ℓ_k) ∈ (−x, 0]]`.
    pub value: f64,
    pub stat_error: f64,
    pub chains: u64,
    pub resamples: u64,
}

struct PotentialExperiment<'a> {
    marginal: &'a Marginal1D,
    x: f64,
    horizon: u64,
    master_seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct PotentialPartial {
    visits: u64,
    visits_sq: u64,
    resamples: u64,
    error: bool,
}

impl PathExperiment for PotentialExperiment<'_> {
    type Partial = PotentialPartial;
    type Output = PotentialPartial;

    fn run_chunk(&self, range: Range<u64>) -> PotentialPartial {
        let mut acc = PotentialPartial::default();
        for i in range {
            let mut stream = RngStream::new(self.master_seed, i);
            let mut level = 0.0;
            let mut visits = 1u64;
            loop {
                match ladder_unchecked(self.marginal, &mut stream, self.horizon) {
                    Ok(l) => {
                        acc.resamples += l.resamples as u64;
                        level += l.height;
                        if level > -self.x {
                            visits += 1;
                        } else {
                            break;
                        }
                    }
                    Err(_) => {
                        acc.error = true;
                        break;
                    }
                }
            }
            acc.visits += visits;
            acc.visits_sq += visits * visits;
        }
        acc
    }

    fn combine(&self, a: PotentialPartial, b: PotentialPartial) -> PotentialPartial {
        PotentialPartial {
            visits: a.visits + b.visits,
            visits_sq: a.visits_sq + b.visits_sq,
            resamples: a.resamples + b.resamples,
            error: a.error || b.error,
        }
    }

    fn finish(&self, total: PotentialPartial, _paths: u64) -> PotentialPartial {
        total
    }
}

/// Estimates the potential kernel `U(x)` of the descending ladder height
/// chain by counting its visits to `(−x, 0]` (the start counts) over
/// `chains` independent chains.
pub fn potential_kernel_u<R: ChunkRunner>(
    marginal: &Marginal1D,
    x: f64,
    chains: u64,
    master_seed: u64,
    horizon: u64,
    runner: &R,
) -> Result<PotentialEstimate> {
    require_centered(marginal)?;
    if !(x > 0.0) || chains == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("x, chains and horizon must be positive".into()));
    }
    let t = runner.run(
        &PotentialExperiment {
            marginal,
            x,
            horizon,
            master_seed,
        },
        chains,
    );
    if t.error {
        return Err(Error::InvalidArgument("ladder epoch not reached".into()));
    }
    let n = chains as f64;
    let mean = t.visits as f64 / n;
    let var = (t.visits_sq as f64 / n - mean * mean).max(0.0);
    Ok(PotentialEstimate {
        x,
        value: mean,
        stat_error: libm::sqrt(var / n),
        chains,
        resamples: t.resamples,
    })
}
