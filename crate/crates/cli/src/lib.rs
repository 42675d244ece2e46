//! Experiment driver for the wearable coverage model: configuration files,
//! CSV outputs and the validation checks behind the `wearcov` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod oracle;
pub mod table;
pub mod validation;

pub use commands::{run, Command, RunSummary};
pub use config::ExperimentConfig;
pub use error::CliError;
