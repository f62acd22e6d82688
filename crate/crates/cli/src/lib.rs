//! File formats, configuration, oracles and the threaded executor behind the
//! `nsga-pinn` command.

pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod oracle;
pub mod output;
pub mod report;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
pub use exec::Threads;
