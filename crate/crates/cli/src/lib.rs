//! Batch front-end: configuration files, subcommands and artifact writers.

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

use std::fmt;

/// Failure classes, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// Failure during a run or while writing artifacts (exit 3).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub(crate) fn from_core_config(e: cofrag_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A check reported violations (exit 1).
    Violations,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violations => 1,
        }
    }
}
