//! Library half of the `paxcast` binary: configuration handling and the
//! four commands, callable without spawning a process.

pub mod commands;
pub mod config;

use std::fmt;

pub use commands::{cmd_evaluate, cmd_forecast, cmd_gradcheck, cmd_synth, cmd_train};
pub use config::{Overrides, RunConfig};

/// Command failure, split by exit code: bad input or configuration (1)
/// versus failures during computation or output (2).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<paxcast_core::Error> for CliError {
    fn from(e: paxcast_core::Error) -> Self {
        let msg = e.to_string().replace('\n', " ");
        if e.is_numeric() {
            CliError::Runtime(msg)
        } else {
            CliError::Validation(msg)
        }
    }
}
