//! Experiment harness, file formats and command-line support built on
//! [`bimatch_core`].
//!
//! [`harness`] runs replicated studies in parallel with per-replication seeds,
//! [`experiment`] loads JSON study specifications and writes their outputs,
//! and [`formats`] holds the edge-list, CSV and JSON encodings.

pub mod error;
pub mod experiment;
pub mod formats;
pub mod harness;
pub mod stats;

pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentSpec, Outcome, Plan};
pub use stats::Stats;

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter(
            "--threads must be at least 1".into(),
        )),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()?
            .install(f)),
    }
}
