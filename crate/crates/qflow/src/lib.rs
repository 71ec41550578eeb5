//! File formats, run configuration, pipeline orchestration and reports
//! around the `qflow-core` solvers.

pub mod basis_file;
pub mod config;
pub mod error;
pub mod fcidump;
pub mod geometry_file;
pub mod pipeline;
pub mod report;

pub use config::{Method, RunConfig};
pub use error::{Error, Result};
pub use pipeline::{qflow_from_fcidump, run, RunOutcome};
