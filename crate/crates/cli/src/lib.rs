//! Command-line surface for the `garp` crate: configuration, CSV ingestion, result files
//! and the `simulate` / `fit` / `summarize` / `prior-check` subcommands.

pub mod commands;
pub mod config;
pub mod data;
pub mod output;

pub use commands::{run, Cli, Stage, StageError};
pub use config::{parse_config, RunConfig};
