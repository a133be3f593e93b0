// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! The `quditsynth` command-line harness.
//!
//! Every subcommand reads one JSON configuration (defaults, then config
//! file, then `QUDITSYNTH_*` environment variables, then flags), runs a
//! deterministic seeded computation from the `quditsynth` library, and
//! writes a self-contained run directory:
//!
//! * `record.json` — schema version, fully resolved configuration,
//!   master seed, timestamps, and structured outputs;
//! * `summary.csv` — headline numbers (floats carry 17 significant
//!   digits);
//! * `pulses.csv` — optimized control amplitudes, for pulse runs.
//!
//! Re-running a record's configuration with `--serial` reproduces the
//! `outputs` block bit-for-bit; timing and timestamps live outside it.
//!
//! Exit codes: 0 success, 2 configuration error, 3 inconclusive result,
//! 64 unknown subcommand.

pub mod config;
pub mod error;
pub mod record;
pub mod runner;
pub mod suites;
pub mod tables;

pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_UNKNOWN_SUBCOMMAND};
pub use runner::{run_cli, Cli, Command};
