//! File formats, configuration and pipeline for the `netinfluence` binary.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod plot;
pub mod report;

pub use error::{CliError, CliResult};
