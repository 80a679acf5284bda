//! Command-line front end: problem files, run artifacts and subcommands.

pub mod commands;
pub mod output;
pub mod problem;

pub use commands::{run, Cli};
