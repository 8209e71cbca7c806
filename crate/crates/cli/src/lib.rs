//! Command-line front end for the MPTV deconvolution toolkit: deblurring,
//! synthetic benchmark generation, benchmarking with plot-ready CSV reports,
//! and a self-contained 1D demonstration.
//!
//! The binary lives in `main.rs`; everything here is a library so the
//! commands can also be driven in-process by tests.

pub mod commands;
pub mod config;
pub mod error;
pub mod imageio;
pub mod report;

pub use config::{ConfigArgs, FileConfig, Method, RunConfig, Toggle};
pub use error::{CliError, Result};

/// Name of the environment variable capping the benchmark worker pool.
pub const THREADS_ENV: &str = "MPTV_THREADS";

/// Applies `MPTV_THREADS` to the global worker pool. Call once at startup;
/// returns the thread count when the variable is set and valid.
pub fn init_thread_pool() -> Option<usize> {
    let n: usize = std::env::var(THREADS_ENV).ok()?.parse().ok()?;
    if n == 0 {
        return None;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .ok()?;
    Some(n)
}
