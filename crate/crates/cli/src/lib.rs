//! Configuration and commands behind the `trigan` binary.

pub mod commands;
pub mod config;

pub use commands::{eval, gen_data, sweep, train, CliError, CliResult, TrainSummary};
pub use config::{BaselineKind, ExperimentConfig, Overrides, Precision};
