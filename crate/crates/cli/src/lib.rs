//! Command-line runner for the saturation experiments: config parsing, output directory
//! management and the `phantom`, `train`, `evaluate` and `rates` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{load_config, run, Command};
pub use config::{ExperimentConfig, ExperimentId};
pub use error::CliError;
pub use output::{manifest_name, RunManifest};
