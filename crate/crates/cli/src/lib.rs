//! The `donut` pipeline: staged artifacts on disk, a digest manifest for
//! incremental reruns, and the acceptance checks.

pub mod acceptance;
pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod persist;
pub mod pipeline;
pub mod stages;

pub use commands::{run, Cli};
pub use config::{PipelineConfig, WORKDIR_ENV};
pub use error::{CliError, Result};
pub use pipeline::{run_all, RunManifest, RunOutcome};
