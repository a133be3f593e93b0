// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Rebuilding the two headline tables from run records.
//!
//! The gate-count table cross-tabulates minimum entangling-gate counts
//! against the analytic lower bounds. A cell backed by an exhaustive
//! (or bound-matching) record renders as a bare integer; a cell backed
//! by a probabilistic record renders as `≤ N`; cells without a record
//! stay blank.
//!
//! The minimum-time table lists, per (task, n, d) cell, the minimum
//! pulse times found for each seed in `T_CZ2` units, with the
//! fractional grid spacing appended in parentheses.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use quditsynth::bounds::{cz_lower_bound, Task};
use quditsynth::synth::{Certificate, SynthesisReport};

use crate::error::{CliError, CliResult};
use crate::record::fmt_f64;

/// One synthesis record distilled to a table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCountEntry {
    pub task: Task,
    pub n: usize,
    pub d: usize,
    pub n_min: Option<usize>,
    pub certificate: Certificate,
}

impl GateCountEntry {
    pub fn from_report(report: &SynthesisReport) -> Self {
        Self {
            task: report.task,
            n: report.system.qudits(),
            d: report.system.levels(),
            n_min: report.n_min,
            certificate: report.certificate,
        }
    }
}

/// Renders one minimum-count cell: `"3"` when the count is certified
/// exact, `"≤ 3"` when it is only an upper bound, `""` otherwise.
pub fn render_minimum(entry: &GateCountEntry) -> String {
    match (entry.certificate, entry.n_min) {
        (Certificate::Exact, Some(n)) => n.to_string(),
        (Certificate::UpperBound, Some(n)) => format!("≤ {n}"),
        _ => String::new(),
    }
}

/// Builds the gate-count table rows: `task, d, n, lower_bound, minimum`.
///
/// Conflicting records for the same cell (different counts, or an exact
/// count disagreeing with an upper bound below it) are an error.
pub fn gate_count_table(entries: &[GateCountEntry]) -> CliResult<Vec<Vec<String>>> {
    let mut cells: BTreeMap<(u8, usize, usize), GateCountEntry> = BTreeMap::new();
    for entry in entries {
        let key = (task_order(entry.task), entry.d, entry.n);
        if let Some(prior) = cells.get(&key) {
            let keep = pick_cell(prior, entry)?;
            cells.insert(key, keep);
        } else {
            cells.insert(key, *entry);
        }
    }
    let mut rows = Vec::new();
    for entry in cells.values() {
        rows.push(vec![
            entry.task.label().to_string(),
            entry.d.to_string(),
            entry.n.to_string(),
            cz_lower_bound(entry.n, entry.d, entry.task).to_string(),
            render_minimum(entry),
        ]);
    }
    Ok(rows)
}

pub const GATE_COUNT_HEADERS: [&str; 5] = ["task", "d", "n", "lower_bound", "minimum"];

fn task_order(task: Task) -> u8 {
    match task {
        Task::StatePrep => 0,
        Task::UnitarySynth => 1,
    }
}

/// Merges two records for the same cell, preferring exact counts over
/// upper bounds and tighter bounds over looser ones.
fn pick_cell(a: &GateCountEntry, b: &GateCountEntry) -> CliResult<GateCountEntry> {
    use Certificate::*;
    let conflict = || {
        CliError::Config(format!(
            "conflicting records for task={} n={} d={}: {:?} {:?} vs {:?} {:?}",
            a.task.label(),
            a.n,
            a.d,
            a.certificate,
            a.n_min,
            b.certificate,
            b.n_min
        ))
    };
    match (a.certificate, b.certificate) {
        (Exact, Exact) => {
            if a.n_min == b.n_min {
                Ok(*a)
            } else {
                Err(conflict())
            }
        }
        (Exact, UpperBound) => {
            if b.n_min < a.n_min {
                Err(conflict())
            } else {
                Ok(*a)
            }
        }
        (UpperBound, Exact) => pick_cell(b, a),
        (UpperBound, UpperBound) => Ok(if b.n_min < a.n_min { *b } else { *a }),
        (Inconclusive, _) => Ok(*b),
        (_, Inconclusive) => Ok(*a),
    }
}

/// One minimum-time record distilled to a table contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTimeEntry {
    pub task: Task,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// In `T_CZ2` units; `None` when the sweep was inconclusive.
    pub t_min: Option<f64>,
    /// Fractional grid spacing (ratio − 1).
    pub spacing: f64,
}

/// Renders one minimum-time cell: the per-seed values in seed order
/// followed by the grid spacing in parentheses, e.g.
/// `"1.331 1.210 1.331 (0.1)"`. Inconclusive seeds render as `>cap?`
/// placeholders (`—`).
pub fn render_t_min_cell(entries: &[&MinTimeEntry]) -> String {
    let mut sorted: Vec<&&MinTimeEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.seed);
    let values: Vec<String> = sorted
        .iter()
        .map(|e| match e.t_min {
            Some(t) => format!("{t:.4}"),
            None => "—".to_string(),
        })
        .collect();
    let spacing = sorted.first().map_or(0.0, |e| e.spacing);
    format!("{} ({})", values.join(" "), trim_float(spacing))
}

fn trim_float(x: f64) -> String {
    let text = format!("{x:.4}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text.is_empty() {
        "0".to_string()
    } else {
        text.to_string()
    }
}

pub const MIN_TIME_HEADERS: [&str; 5] = ["task", "d", "n", "t_min_over_tcz2", "seeds"];

/// Builds the minimum-time table rows:
/// `task, d, n, rendered cell, seed count`. Per-seed full-precision
/// values stay in the individual run records.
pub fn min_time_table(entries: &[MinTimeEntry]) -> Vec<Vec<String>> {
    let mut cells: BTreeMap<(u8, usize, usize), Vec<&MinTimeEntry>> = BTreeMap::new();
    for entry in entries {
        cells
            .entry((task_order(entry.task), entry.d, entry.n))
            .or_default()
            .push(entry);
    }
    cells
        .iter()
        .map(|((_, d, n), cell)| {
            let task = cell[0].task;
            vec![
                task.label().to_string(),
                d.to_string(),
                n.to_string(),
                render_t_min_cell(cell),
                cell.len().to_string(),
            ]
        })
        .collect()
}

/// Writes a rendered table as CSV.
pub fn write_table(
    dir: &Path,
    file: &str,
    headers: &[&str],
    rows: &[Vec<String>],
) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(file);
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(headers)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(path)
}

/// Full-precision per-seed rows for machine consumption:
/// `task, d, n, seed, t_min, spacing`.
pub const MIN_TIME_SEED_HEADERS: [&str; 6] = ["task", "d", "n", "seed", "t_min_over_tcz2", "spacing"];

pub fn min_time_seed_rows(entries: &[MinTimeEntry]) -> Vec<Vec<String>> {
    let mut sorted: Vec<&MinTimeEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| (task_order(e.task), e.d, e.n, e.seed));
    sorted
        .iter()
        .map(|e| {
            vec![
                e.task.label().to_string(),
                e.d.to_string(),
                e.n.to_string(),
                e.seed.to_string(),
                e.t_min.map(fmt_f64).unwrap_or_default(),
                fmt_f64(e.spacing),
            ]
        })
        .collect()
}
