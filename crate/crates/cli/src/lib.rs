//! Library side of the `pac-sim` tool: file formats, commands and writers.

pub mod commands;
pub mod error;
pub mod files;
pub mod format;
pub mod svg;

pub use error::{CliError, CliResult};
