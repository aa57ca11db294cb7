//! Experiment runner for warped-kernel Bayesian optimisation: config files,
//! method x seed grids, trace and aggregate CSVs, and external objectives.

pub mod aggregate;
pub mod config;
pub mod experiment;
pub mod external;
pub mod trace;

pub use config::{ConfigError, Experiment, ExperimentConfig, Method};
pub use experiment::{aggregate_dir, run_experiment, ExperimentError};
