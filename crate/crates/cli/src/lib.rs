//! File formats, reports and commands of the `annulus` tool.

pub mod commands;
pub mod error;
pub mod report;
pub mod tuple_file;

pub use commands::{run, Cli, Outcome};
pub use error::CliError;
