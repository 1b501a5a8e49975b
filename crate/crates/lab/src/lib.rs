//! Experiment driver for `pinning-core`: JSON configs in, run records and
//! CSV tables out, plus the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;

pub use config::{Experiment, ExperimentConfig, Model};
pub use error::{LabError, Result};
pub use experiments::{run, RunOutput};
pub use record::{RunRecord, Table, VERSION};
