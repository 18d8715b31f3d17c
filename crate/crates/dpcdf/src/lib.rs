//! Harness around [`dpcdf_core`]: sample-file ingestion, experiment
//! configuration, the seeded Monte Carlo runner, report emission and the
//! pieces behind each CLI subcommand.

pub mod config;
pub mod error;
pub mod experiment;
pub mod figure1;
pub mod ingest;
pub mod optimize_cmd;
pub mod report;

pub use error::{HarnessError, Result};
