//! Experiment runner for `levy-ats-core`: JSON configs, run manifests,
//! CSV/JSON/binary outputs, thread-pool drivers and the `levy-ats` command.

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod manifest;
pub mod parallel;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
