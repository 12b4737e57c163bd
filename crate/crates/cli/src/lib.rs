//! Command-line front end: configuration, file formats and subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod levels_io;

pub use commands::{Format, Outcome};
pub use config::RunConfig;
pub use error::CliError;
