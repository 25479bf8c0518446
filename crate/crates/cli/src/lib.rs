//! Dataset ingestion, model bundles and subcommands behind the `veob` binary.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod ingest;
pub mod report;

pub use error::{CliError, CliResult};
