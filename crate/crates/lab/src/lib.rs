//! Experiment runner for `schonmann-core`: configuration parsing, one
//! runner per experiment, CSV output and a checksummed run manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod runner;

pub use config::{parse_config, Experiment, RunConfig};
pub use error::LabError;
pub use manifest::Manifest;
