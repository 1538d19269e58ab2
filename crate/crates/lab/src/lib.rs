//! Experiment harness for operator-ordering studies: configs, fixture
//! resolution, ordering ensembles, PES scans, statistics and SVG plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod plot;
pub mod stats;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
