//! Command-line front end for `cumrate`: reads a JSON problem file, runs
//! one analysis, prints JSON on stdout.
//!
//! Exit codes: 0 success or achievable, 1 not achievable, 2 invalid input.

mod commands;
mod error;
pub mod problem;
pub mod table;

pub use commands::{run, Cli, Command, CommonArgs, Emission, Figure};
pub use error::CliError;
pub use problem::ProblemFile;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_ACHIEVABLE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
