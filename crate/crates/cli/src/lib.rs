//! Library behind the `kmmeans` command-line tool: CSV ingestion with a
//! missing-value token, per-column transforms, and the subcommands.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod transform;

pub use error::CliError;
