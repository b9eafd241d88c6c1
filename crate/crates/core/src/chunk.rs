//! Deterministic chunked execution of per-path Monte Carlo experiments.
//!
//! Path `i` of an experiment always draws from stream `i` of the master
//! seed (see [`crate::model::RngStream`]). Paths are grouped into fixed
//! chunks of [`CHUNK_PATHS`]; each chunk is reduced sequentially in path
//! order, and chunk results are combined in chunk order. A parallel driver
//! that evaluates chunks on any number of workers and then combines them in
//! index order therefore produces bit-identical output to
//! [`run_sequential`].

use core::ops::Range;

/// Number of paths per chunk. Part of the reproducibility contract.
pub const CHUNK_PATHS: u64 = 4096;

/// A Monte Carlo experiment made of independent paths.
pub trait PathExperiment: Sync {
    type Partial: Send;
    type Output;

    /// Runs the paths in `range`, in increasing index order.
    fn run_chunk(&self, range: Range<u64>) -> Self::Partial;

    /// Folds `next` (the chunk following `acc`) into `acc`.
    fn combine(&self, acc: Self::Partial, next: Self::Partial) -> Self::Partial;

    fn finish(&self, total: Self::Partial, paths: u64) -> Self::Output;
}

/// Path-index ranges of every chunk, in order.
pub fn chunk_ranges(paths: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    let chunks = paths.div_ceil(CHUNK_PATHS);
    (0..chunks).map(move |c| {
        let start = c * CHUNK_PATHS;
        start..(start + CHUNK_PATHS).min(paths)
    })
}

/// Runs `paths` paths of `experiment` on the current thread.
pub fn run_sequential<E: PathExperiment>(experiment: &E, paths: u64) -> E::Output {
    let mut ranges = chunk_ranges(paths);
    let first = ranges.next().unwrap_or(0..0);
    let mut acc = experiment.run_chunk(first);
    for range in ranges {
        let next = experiment.run_chunk(range);
        acc = experiment.combine(acc, next);
    }
    experiment.finish(acc, paths)
}

/// Something that can evaluate a [`PathExperiment`]. Implementations must
/// combine chunk results in chunk order so that output does not depend on
/// scheduling.
pub trait ChunkRunner {
    fn run<E: PathExperiment>(&self, experiment: &E, paths: u64) -> E::Output;
}

/// Runs every chunk on the calling thread.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Sequential;

impl ChunkRunner for Sequential {
    fn run<E: PathExperiment>(&self, experiment: &E, paths: u64) -> E::Output {
        run_sequential(experiment, paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn ranges_cover_exactly() {
        let ranges: Vec<_> = chunk_ranges(10_000).collect();
        assert_eq!(ranges.len(), 3);
        assert_eq!(ranges[0], 0..4096);
        assert_eq!(ranges[2], 8192..10_000);
        assert_eq!(chunk_ranges(0).count(), 0);
    }
}
