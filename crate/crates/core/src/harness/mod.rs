//! Experiment orchestration: configuration, per-trial building blocks and
//! the commands behind the command-line tool.

pub mod commands;
pub mod config;
pub mod experiment;

pub use commands::*;
pub use config::ExperimentConfig;
pub use experiment::*;
