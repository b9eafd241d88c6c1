//! Parallel evaluation of path experiments with scheduling-independent
//! results.

use lindley2d_core::chunk::{chunk_ranges, ChunkRunner, PathExperiment};
use rayon::prelude::*;

/// Chunks evaluated per worker before folding, bounding memory held in
/// partial results.
const CHUNKS_PER_WORKER_BATCH: usize = 32;

/// Evaluates chunks on a dedicated rayon pool and folds the partial
/// results strictly in chunk order, so output is bit-identical for any
/// number of workers.
pub struct ParallelRunner {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl ParallelRunner {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool, workers })
    }

    /// One worker per available CPU.
    pub fn with_available_parallelism() -> Result<Self, rayon::ThreadPoolBuildError> {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl ChunkRunner for ParallelRunner {
    fn run<E: PathExperiment>(&self, experiment: &E, paths: u64) -> E::Output {
        let ranges: Vec<_> = chunk_ranges(paths).collect();
        if ranges.is_empty() {
            return experiment.finish(experiment.run_chunk(0..0), paths);
        }
        let batch = self.workers * CHUNKS_PER_WORKER_BATCH;
        let mut acc: Option<E::Partial> = None;
        for group in ranges.chunks(batch) {
            let partials: Vec<E::Partial> = self
                .pool
                .install(|| group.par_iter().map(|r| experiment.run_chunk(r.clone())).collect());
            for p in partials {
                acc = Some(match acc {
                    None => p,
                    Some(a) => experiment.combine(a, p),
                });
            }
        }
        experiment.finish(acc.expect("at least one chunk"), paths)
    }
}
