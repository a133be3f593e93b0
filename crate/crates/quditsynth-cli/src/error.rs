// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Harness errors and their process exit codes.
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success                                  |
//! | 2    | configuration or input error             |
//! | 3    | run finished but the result is inconclusive |
//! | 64   | unknown subcommand                       |

use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_UNKNOWN_SUBCOMMAND: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config, impossible request.
    Config(String),
    /// The computation completed but could not certify a result
    /// (e.g. a gate-count search that exhausted its cap, or a time
    /// sweep that never crossed threshold).
    Inconclusive(String),
    /// Anything else: I/O while writing outputs, numerical failure.
    Internal(String),
}

impl CliError {
    /// Wraps any displayable error as a configuration error.
    pub fn config(err: impl fmt::Display) -> Self {
        CliError::Config(err.to_string())
    }

    pub fn internal(err: impl fmt::Display) -> Self {
        CliError::Internal(err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Inconclusive(_) => EXIT_INCONCLUSIVE,
            CliError::Internal(_) => EXIT_CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Inconclusive(msg) => write!(f, "inconclusive: {msg}"),
            CliError::Internal(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Internal(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Internal(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Internal(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
