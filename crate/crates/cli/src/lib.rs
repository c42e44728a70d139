//! Experiment driver for the qudit classifier and its classical baseline:
//! configuration, repeated seeded runs, and run artifacts.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod kv;

pub use artifacts::{ParamsFile, RunOutcome, RunRecord, RunSummary, Stats};
pub use commands::{cmd_compare, cmd_evaluate, cmd_inspect, cmd_train, execute, SplitChoice};
pub use config::{ModelConfig, ModelKind, Overrides, RunConfig};
pub use error::{CliError, CliResult};
