// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Run records and output files.
//!
//! Every run writes one directory containing `record.json` (the full
//! record: schema version, resolved configuration, seed, timestamps,
//! and the structured outputs) and `summary.csv` (headline numbers).
//! Control runs additionally write `pulses.csv` with the optimized
//! amplitudes. Wall-clock timing lives next to, never inside, the
//! `outputs` block, so re-running a record reproduces `outputs`
//! bit-for-bit.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use quditsynth::bounds::{Entangler, Task};
use quditsynth::control::{Channel, GrapeOutcome, MinTimeResult, PulseSchedule, Quadrature};
use quditsynth::speedest::{HierarchyLayer, TimeEstimate};
use quditsynth::synth::SynthesisReport;
use quditsynth::targets::{RandomTargetSpec, Target};

use crate::config::Config;
use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a float with 17 significant digits, enough to reconstruct
/// the exact binary value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of the lower-bound table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub d: usize,
    pub task: Task,
    pub entangler: Entangler,
    pub gate_count: u64,
}

/// Outcome of one run inside a suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntryOutcome {
    pub name: String,
    pub slow: bool,
    /// `true` when a slow entry was skipped (no `--include-slow`).
    pub skipped: bool,
    /// Whether the entry certified its result; `None` when skipped.
    pub conclusive: Option<bool>,
    /// Relative path of the entry's record, when it ran.
    pub record: Option<String>,
}

/// The structured result block of a run; everything in here is a pure
/// function of the resolved configuration.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outputs {
    Bounds {
        rows: Vec<BoundRow>,
    },
    Target {
        spec: RandomTargetSpec,
        target: Target,
    },
    Synthesis {
        report: SynthesisReport,
    },
    Grape {
        t_over_tcz2: f64,
        slices: usize,
        channels: Vec<String>,
        outcome: GrapeOutcome,
    },
    MinTime {
        channels: Vec<String>,
        result: MinTimeResult,
    },
    SpeedEstimate {
        epsilon: f64,
        depth: usize,
        residual: f64,
        layers: Vec<HierarchyLayer>,
        estimate: TimeEstimate,
        k_low: u64,
        k_high: u64,
        depth_within_bounds: bool,
    },
    Controllability {
        rank: usize,
        full_rank: usize,
        controllable: bool,
    },
    Suite {
        suite: String,
        entries: Vec<SuiteEntryOutcome>,
    },
}

/// The complete record of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub library_version: String,
    pub subcommand: String,
    pub master_seed: u64,
    /// Fully resolved configuration; feeding this back through
    /// `--config` re-runs the identical computation.
    pub config: Config,
    pub started_at: String,
    pub finished_at: String,
    /// Timing; deliberately outside `outputs`.
    pub wall_seconds: f64,
    pub outputs: Outputs,
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now()
        .to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

impl RunRecord {
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("record.json");
        let mut file = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(path)
    }
}

/// Writes `summary.csv` into `dir`.
pub fn write_summary(dir: &Path, headers: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("summary.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(headers)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(path)
}

/// Short text label for a control channel, e.g. `q0_01_x`.
pub fn channel_label(channel: &Channel) -> String {
    let quad = match channel.quadrature {
        Quadrature::X => "x",
        Quadrature::Y => "y",
    };
    format!(
        "q{}_{}{}_{}",
        channel.qudit, channel.levels.0, channel.levels.1, quad
    )
}

/// Writes `pulses.csv`: slice index, slice start time (same unit as the
/// schedule's `total_time`), and one amplitude column per channel.
pub fn write_pulses(
    dir: &Path,
    channels: &[Channel],
    schedule: &PulseSchedule,
) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("pulses.csv");
    let mut writer = csv::Writer::from_path(&path)?;
    let mut headers = vec!["slice".to_string(), "time".to_string()];
    headers.extend(channels.iter().map(channel_label));
    writer.write_record(&headers)?;
    let dt = schedule.total_time / schedule.slices() as f64;
    for (s, amps) in schedule.amplitudes.iter().enumerate() {
        let mut row = vec![s.to_string(), fmt_f64(s as f64 * dt)];
        row.extend(amps.iter().map(|a| fmt_f64(*a)));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        let x = 0.1f64 + 0.2;
        let text = fmt_f64(x);
        assert_eq!(text, "3.0000000000000004e-1");
        assert_eq!(text.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn float_format_round_trips_extremes() {
        for &x in &[
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -7.25e100,
            0.0,
        ] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x, "{x}");
        }
    }

    #[test]
    fn channel_labels() {
        let ch = Channel {
            qudit: 1,
            levels: (1, 2),
            quadrature: Quadrature::Y,
        };
        assert_eq!(channel_label(&ch), "q1_12_y");
    }
}
