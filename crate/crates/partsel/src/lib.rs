//! Partition release pipelines, figure data and the `partsel` command-line
//! tool, built on [`partsel_core`].

pub mod bench;
pub mod csvio;
pub mod error;
pub mod figures;
pub mod histogram;
pub mod pipeline;
pub mod release;

pub use error::{PipelineError, Result};
pub use histogram::{
    ingest, ingest_sharded, ContributionMode, HistogramBuilder, IngestOptions, PartitionHistogram,
};
pub use pipeline::{run_select, ReleaseMode, SelectConfig};
pub use release::{dual_threshold_release, select_partitions, thresholded_release, ReleaseRecord};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DP_PS_THREADS";

/// Runs `f` on a dedicated rayon pool with `threads` workers, or on the
/// global pool when `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
