//! Experiment configuration and Monte-Carlo runner for `mpctrack`.

pub mod config;
pub mod error;
pub mod runner;

pub use config::{load_config, parse_config, validate_config, ExperimentConfig, LoadedConfig, Mode};
pub use error::{CliError, FieldIssue, Result};
pub use runner::{run_experiment, run_single, write_outputs, ExperimentOutput, RunOutput};
