//! Experiment runner for the asynchronous FTN-NOMA rate simulator.
//!
//! A JSON config selects one experiment; the runner writes a CSV dataset
//! and a JSON sidecar describing exactly how it was produced.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use run::{compute, execute, Dataset, Written};
