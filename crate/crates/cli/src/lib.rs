//! Library half of the `rinv` binary: argument parsing, file formats and
//! the subcommands, kept here so integration tests can drive them directly.

pub mod commands;
pub mod mm;

pub use commands::{run, Cli, Command};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const CERTIFICATE_FAILED: i32 = 2;
}
