//! File formats, experiment drivers and the command-line interface around
//! `secf-core`.
//!
//! Everything that touches the file system or the clock lives here: CSV
//! sample files, JSON results with 17 significant digits, timed estimator
//! runs and the Monte Carlo efficiency benchmarks.

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod json;
pub mod run;

pub use bench::{chain_benchmark, gaussian_benchmark, gaussian_benchmark_with, Efficiency, EfficiencyReport, MethodReport};
pub use error::{Result, SecfError};
pub use io::{load_samples, write_samples};
pub use run::{run_estimation, Estimation, EstimationConfig, LambdaChoice};
