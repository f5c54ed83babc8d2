//! Command-line front end for `polylearn-core`: data generation, one
//! subcommand per algorithm, and JSON reports.

pub mod cli;
pub mod commands;
pub mod matrix;
pub mod report;

pub use cli::{parse_constants, run, Cli, Command};
