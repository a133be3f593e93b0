// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: flag parsing, configuration resolution,
//! subcommand dispatch, and output writing.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use quditsynth::bounds::{lower_bound, BoundQuery, Entangler, Task};
use quditsynth::control::{
    build_hamiltonian, controllability_rank, grape_optimize, min_time_sweep, Channel,
    PulseSchedule,
};
use quditsynth::linalg::hs_norm;
use quditsynth::qcore::UnitaryMatrix;
use quditsynth::rng::SeedSequence;
use quditsynth::speedest::{
    default_hbar, deform_unitary, hierarchy_decompose, k_bounds, time_estimate,
};
use quditsynth::synth::{find_min_gates, Certificate, SearchStrategy, DEFAULT_TRIALS};

use crate::config::{Config, SlicePolicy, SystemCfg, TargetSelector};
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK, EXIT_UNKNOWN_SUBCOMMAND};
use crate::record::{
    channel_label, fmt_f64, now_rfc3339, write_pulses, write_summary, BoundRow, Outputs,
    RunRecord, SCHEMA_VERSION,
};
use crate::suites::{suite_by_name, suite_names};
use crate::tables::{
    gate_count_table, min_time_seed_rows, min_time_table, write_table, GateCountEntry,
    MinTimeEntry, GATE_COUNT_HEADERS, MIN_TIME_HEADERS, MIN_TIME_SEED_HEADERS,
};

/// Environment-variable override prefix: `QUDITSYNTH_CONFIG`,
/// `QUDITSYNTH_SEED`, `QUDITSYNTH_OUT`, `QUDITSYNTH_WORKERS`, and
/// `QUDITSYNTH_SERIAL` stand in for the corresponding global flags.
/// Explicit flags always win over the environment.
pub const ENV_PREFIX: &str = "QUDITSYNTH_";

#[derive(Debug, Parser)]
#[command(
    name = "quditsynth",
    version,
    about = "Gate-count and pulse-time complexity of random qudit targets",
    subcommand_value_name = "SUBCOMMAND"
)]
pub struct Cli {
    #[command(flatten)]
    pub globals: GlobalFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalFlags {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory (default `runs/<subcommand>`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Run single-threaded; implies `--workers 1`.
    #[arg(long, global = true)]
    pub serial: bool,
}

fn parse_task(s: &str) -> Result<Task, String> {
    match s {
        "state" | "state-prep" | "state_prep" => Ok(Task::StatePrep),
        "unitary" | "unitary-synth" | "unitary_synth" => Ok(Task::UnitarySynth),
        other => Err(format!(
            "unknown task {other:?}; expected \"state\" or \"unitary\""
        )),
    }
}

fn parse_entangler(s: &str) -> Result<Entangler, String> {
    match s {
        "cz" => Ok(Entangler::Cz),
        "noncommuting" => Ok(Entangler::Noncommuting),
        other => Err(format!(
            "unknown entangler {other:?}; expected \"cz\" or \"noncommuting\""
        )),
    }
}

/// Shared `--n/--d/--task` overrides.
#[derive(Debug, Clone, Copy, Args)]
pub struct SystemFlags {
    /// Number of qudits.
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    /// Levels per qudit.
    #[arg(long, value_name = "D")]
    pub d: Option<usize>,
    /// `state` or `unitary`.
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the entangling-gate lower-bound table.
    Bounds {
        /// Largest qudit count tabulated.
        #[arg(long, value_name = "N")]
        n_max: Option<usize>,
        /// Largest level count tabulated.
        #[arg(long, value_name = "D")]
        d_max: Option<usize>,
        /// `cz` or `noncommuting`.
        #[arg(long, value_parser = parse_entangler)]
        entangler: Option<Entangler>,
    },
    /// Generate and store a seeded Haar-random target.
    GenTarget {
        #[command(flatten)]
        system: SystemFlags,
    },
    /// Search for the minimum entangling-gate count of a random target.
    SynthSearch {
        #[command(flatten)]
        system: SystemFlags,
        /// Sample configurations instead of enumerating all of them.
        #[arg(long)]
        probabilistic: bool,
        /// Trials for probabilistic search (implies `--probabilistic`).
        #[arg(long, value_name = "T")]
        trials: Option<usize>,
        /// First gate count tried (default: the lower bound).
        #[arg(long, value_name = "N")]
        start_gates: Option<usize>,
        /// Last gate count tried (default: lower bound + 4).
        #[arg(long, value_name = "N")]
        gate_cap: Option<usize>,
    },
    /// Optimize a pulse of fixed duration for a target.
    Grape {
        #[command(flatten)]
        system: SystemFlags,
        /// Pulse time in `T_CZ2` units.
        #[arg(long, value_name = "T")]
        time: Option<f64>,
        /// Time slices (default: scales with the pulse time).
        #[arg(long, value_name = "S")]
        slices: Option<usize>,
        /// Target the two-qudit CZ gate instead of a random target.
        #[arg(long)]
        cz: bool,
    },
    /// Sweep pulse times for the minimum reaching threshold fidelity.
    MinTime {
        #[command(flatten)]
        system: SystemFlags,
        /// First candidate time, in `T_CZ2` units.
        #[arg(long, value_name = "T")]
        t_start: Option<f64>,
        /// Give up beyond this time.
        #[arg(long, value_name = "T")]
        t_cap: Option<f64>,
        /// Fidelity threshold defining the minimum time.
        #[arg(long, value_name = "F")]
        threshold: Option<f64>,
        /// Target the two-qudit CZ gate instead of a random target.
        #[arg(long)]
        cz: bool,
    },
    /// Estimate synthesis times from the commutator hierarchy.
    SpeedEst {
        #[command(flatten)]
        system: SystemFlags,
        /// Deformation strength ε.
        #[arg(long, value_name = "EPS")]
        epsilon: Option<f64>,
    },
    /// Report the Lie-algebra rank of the control model.
    Controllability {
        #[command(flatten)]
        system: SystemFlags,
        /// Coupling strength override (rad/time).
        #[arg(long, value_name = "G")]
        g: Option<f64>,
    },
    /// Run a named batch of presets and rebuild its results table.
    Suite {
        /// Suite name; see the README for the list.
        name: String,
        /// Also run entries tagged slow.
        #[arg(long)]
        include_slow: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds { .. } => "bounds",
            Command::GenTarget { .. } => "gen-target",
            Command::SynthSearch { .. } => "synth-search",
            Command::Grape { .. } => "grape",
            Command::MinTime { .. } => "min-time",
            Command::SpeedEst { .. } => "speed-est",
            Command::Controllability { .. } => "controllability",
            Command::Suite { .. } => "suite",
        }
    }
}

/// Applies `--n/--d/--task` onto the configuration.
fn apply_system_flags(config: &mut Config, flags: &SystemFlags) {
    if flags.n.is_some() || flags.d.is_some() {
        let base = config.system.unwrap_or_default();
        config.system = Some(SystemCfg {
            n: flags.n.unwrap_or(base.n),
            d: flags.d.unwrap_or(base.d),
        });
    }
    if let Some(task) = flags.task {
        config.task = Some(task);
    }
}

/// Applies subcommand flags onto the configuration (flags win).
pub fn apply_command_flags(config: &mut Config, command: &Command) {
    match command {
        Command::Bounds {
            n_max,
            d_max,
            entangler,
        } => {
            if n_max.is_some() {
                config.bounds.n_max = *n_max;
            }
            if d_max.is_some() {
                config.bounds.d_max = *d_max;
            }
            if entangler.is_some() {
                config.bounds.entangler = *entangler;
            }
        }
        Command::GenTarget { system } => apply_system_flags(config, system),
        Command::SynthSearch {
            system,
            probabilistic,
            trials,
            start_gates,
            gate_cap,
        } => {
            apply_system_flags(config, system);
            if *probabilistic || trials.is_some() {
                config.search.strategy = Some(SearchStrategy::Probabilistic {
                    trials: trials.unwrap_or(DEFAULT_TRIALS),
                });
            }
            if start_gates.is_some() {
                config.search.start_gates = *start_gates;
            }
            if gate_cap.is_some() {
                config.search.gate_cap = *gate_cap;
            }
        }
        Command::Grape {
            system,
            time,
            slices,
            cz,
        } => {
            apply_system_flags(config, system);
            if time.is_some() {
                config.grape.time = *time;
            }
            if let Some(s) = slices {
                config.grape.slices = Some(SlicePolicy::Fixed(*s));
            }
            if *cz {
                config.target = Some(TargetSelector::Cz);
            }
        }
        Command::MinTime {
            system,
            t_start,
            t_cap,
            threshold,
            cz,
        } => {
            apply_system_flags(config, system);
            if t_start.is_some() {
                config.sweep.t_start = *t_start;
            }
            if t_cap.is_some() {
                config.sweep.t_cap = *t_cap;
            }
            if threshold.is_some() {
                config.sweep.threshold = *threshold;
            }
            if *cz {
                config.target = Some(TargetSelector::Cz);
            }
        }
        Command::SpeedEst { system, epsilon } => {
            apply_system_flags(config, system);
            if epsilon.is_some() {
                config.speedest.epsilon = *epsilon;
            }
        }
        Command::Controllability { system, g } => {
            apply_system_flags(config, system);
            if g.is_some() {
                config.model.g = *g;
            }
        }
        Command::Suite { .. } => {}
    }
}

/// Everything a finished run produces, before files are written.
pub struct RunArtifacts {
    pub outputs: Outputs,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Channels and schedule for `pulses.csv`, when the run produced one.
    pub pulses: Option<(Vec<Channel>, PulseSchedule)>,
    /// Extra JSON files: (file name, content).
    pub extra_json: Vec<(&'static str, serde_json::Value)>,
    pub conclusive: bool,
    pub headline: String,
}

/// Kinds of single (non-suite) runs; suites are built from these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubKind {
    Bounds,
    GenTarget,
    SynthSearch,
    Grape,
    MinTime,
    SpeedEst,
    Controllability,
}

impl SubKind {
    pub fn name(&self) -> &'static str {
        match self {
            SubKind::Bounds => "bounds",
            SubKind::GenTarget => "gen-target",
            SubKind::SynthSearch => "synth-search",
            SubKind::Grape => "grape",
            SubKind::MinTime => "min-time",
            SubKind::SpeedEst => "speed-est",
            SubKind::Controllability => "controllability",
        }
    }
}

/// Runs one resolved configuration and assembles its artifacts.
pub fn compute(kind: SubKind, config: &Config) -> CliResult<RunArtifacts> {
    match kind {
        SubKind::Bounds => compute_bounds(config),
        SubKind::GenTarget => compute_gen_target(config),
        SubKind::SynthSearch => compute_synth_search(config),
        SubKind::Grape => compute_grape(config),
        SubKind::MinTime => compute_min_time(config),
        SubKind::SpeedEst => compute_speed_est(config),
        SubKind::Controllability => compute_controllability(config),
    }
}

fn compute_bounds(config: &Config) -> CliResult<RunArtifacts> {
    let n_max = config.bounds.n_max.unwrap_or(4);
    let d_max = config.bounds.d_max.unwrap_or(4);
    let entangler = config.bounds.entangler.unwrap_or(Entangler::Cz);
    let mut bound_rows = Vec::new();
    for d in 2..=d_max {
        for n in 2..=n_max {
            for task in [Task::StatePrep, Task::UnitarySynth] {
                bound_rows.push(BoundRow {
                    n,
                    d,
                    task,
                    entangler,
                    gate_count: lower_bound(&BoundQuery {
                        n,
                        d,
                        task,
                        entangler,
                    }),
                });
            }
        }
    }
    let rows = bound_rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.d.to_string(),
                r.task.label().to_string(),
                r.entangler.label().to_string(),
                r.gate_count.to_string(),
            ]
        })
        .collect();
    let headline = format!(
        "{} lower bounds for n ≤ {n_max}, d ≤ {d_max} ({})",
        bound_rows.len(),
        entangler.label()
    );
    Ok(RunArtifacts {
        outputs: Outputs::Bounds { rows: bound_rows },
        headers: vec!["n", "d", "task", "entangler", "gate_count"],
        rows,
        pulses: None,
        extra_json: Vec::new(),
        conclusive: true,
        headline,
    })
}

fn compute_gen_target(config: &Config) -> CliResult<RunArtifacts> {
    if config.target.unwrap_or_default() != TargetSelector::Random {
        return Err(CliError::Config(
            "gen-target draws random targets; fixed targets need no generation".into(),
        ));
    }
    let spec = config.random_spec()?;
    let target = config.build_target()?;
    let system = config.system()?;
    let rows = vec![vec![
        config.task().label().to_string(),
        system.qudits().to_string(),
        system.levels().to_string(),
        config.master_seed().to_string(),
        spec.randomization_steps.to_string(),
        system.dim().to_string(),
    ]];
    let target_json = serde_json::to_value(&target)?;
    let headline = format!(
        "{} target for n={} d={} (seed {})",
        config.task().label(),
        system.qudits(),
        system.levels(),
        config.master_seed()
    );
    Ok(RunArtifacts {
        outputs: Outputs::Target { spec, target },
        headers: vec!["kind", "n", "d", "seed", "randomization_steps", "dim"],
        rows,
        pulses: None,
        extra_json: vec![("target.json", target_json)],
        conclusive: true,
        headline,
    })
}

fn compute_synth_search(config: &Config) -> CliResult<RunArtifacts> {
    let problem = config.synthesis_problem()?;
    let threshold = problem.settings.success_threshold;
    let report = find_min_gates(&problem).map_err(CliError::internal)?;
    let rows = report
        .fidelity_per_gates
        .iter()
        .map(|p| {
            vec![
                p.gates.to_string(),
                fmt_f64(p.fidelity),
                (p.fidelity >= threshold).to_string(),
            ]
        })
        .collect();
    let headline = match (report.certificate, report.n_min) {
        (Certificate::Exact, Some(n)) => format!("minimum gate count {n} (exact)"),
        (Certificate::UpperBound, Some(n)) => format!("minimum gate count ≤ {n}"),
        _ => format!(
            "inconclusive: no success up to {} gates",
            report
                .fidelity_per_gates
                .last()
                .map_or(0, |p| p.gates)
        ),
    };
    let conclusive = report.certificate != Certificate::Inconclusive;
    Ok(RunArtifacts {
        outputs: Outputs::Synthesis { report },
        headers: vec!["gates", "best_fidelity", "success"],
        rows,
        pulses: None,
        extra_json: Vec::new(),
        conclusive,
        headline,
    })
}

fn compute_grape(config: &Config) -> CliResult<RunArtifacts> {
    let model = config.control_model()?;
    let target = config.build_target()?;
    let t = config.grape.time.unwrap_or(1.0);
    if !(t > 0.0) || !t.is_finite() {
        return Err(CliError::Config(format!(
            "grape.time must be positive, got {t}"
        )));
    }
    let slices = config.grape.slices.unwrap_or_default().slices_for(t);
    let settings = config.grape.settings();
    let seeds = SeedSequence::new(config.master_seed());
    let outcome = grape_optimize(&target, &model, t, slices, &settings, None, &seeds, 0)
        .map_err(CliError::internal)?;
    let channels = model.channels();
    let rows = vec![vec![
        fmt_f64(t),
        slices.to_string(),
        fmt_f64(outcome.fidelity),
        outcome.iterations.to_string(),
        outcome.evaluations.to_string(),
    ]];
    let headline = format!(
        "fidelity {:.6} at {} T_CZ2 with {} slices",
        outcome.fidelity, t, slices
    );
    Ok(RunArtifacts {
        pulses: Some((channels.clone(), outcome.schedule.clone())),
        outputs: Outputs::Grape {
            t_over_tcz2: t,
            slices,
            channels: channels.iter().map(channel_label).collect(),
            outcome,
        },
        headers: vec![
            "t_over_tcz2",
            "slices",
            "fidelity",
            "iterations",
            "evaluations",
        ],
        rows,
        extra_json: Vec::new(),
        conclusive: true,
        headline,
    })
}

fn compute_min_time(config: &Config) -> CliResult<RunArtifacts> {
    let model = config.control_model()?;
    let target = config.build_target()?;
    let settings = config.sweep_settings();
    let seeds = SeedSequence::new(config.master_seed());
    let result = min_time_sweep(&target, &model, &settings, &seeds).map_err(CliError::internal)?;
    let rows = result
        .trace
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.t),
                fmt_f64(p.fidelity),
                (p.fidelity >= result.threshold).to_string(),
            ]
        })
        .collect();
    let headline = match result.t_min {
        Some(t) => format!(
            "T_min = {:.4} T_CZ2 (threshold {}, spacing {:.0}%)",
            t,
            result.threshold,
            result.spacing * 100.0
        ),
        None => format!(
            "inconclusive: threshold {} not reached below the time cap",
            result.threshold
        ),
    };
    let conclusive = result.conclusive();
    let pulses = result
        .winning_schedule
        .clone()
        .map(|s| (model.channels(), s));
    Ok(RunArtifacts {
        outputs: Outputs::MinTime {
            channels: model.channels().iter().map(channel_label).collect(),
            result,
        },
        headers: vec!["t_over_tcz2", "best_fidelity", "crossed"],
        rows,
        pulses,
        extra_json: Vec::new(),
        conclusive,
        headline,
    })
}

fn compute_speed_est(config: &Config) -> CliResult<RunArtifacts> {
    let system = config.system()?;
    let model = config.control_model()?;
    let (h0, controls) = build_hamiltonian(&model).map_err(CliError::internal)?;
    let epsilon = config.speedest.epsilon.unwrap_or(1e-3);
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(CliError::Config(format!(
            "speedest.epsilon must be positive, got {epsilon}"
        )));
    }
    let deform_seed = config.speedest.deform_seed.unwrap_or(config.master_seed());
    let base = UnitaryMatrix::identity(system);
    let deformed = deform_unitary(&base, epsilon, deform_seed).map_err(CliError::internal)?;
    let decomp = hierarchy_decompose(&deformed, &h0, &controls).map_err(CliError::internal)?;
    let hbar = match config.speedest.hbar {
        Some(h) => h,
        None => default_hbar(&h0, &controls),
    };
    let estimate = time_estimate(&decomp, hbar).map_err(CliError::internal)?;
    let generators = controls.len() + usize::from(hs_norm(&h0) > 1e-12);
    let (k_low, k_high) = k_bounds(system.qudits(), system.levels(), generators)
        .map_err(CliError::internal)?;
    let depth_within_bounds = (k_low..=k_high).contains(&(decomp.depth as u64));
    let rows = decomp
        .layers
        .iter()
        .zip(&estimate.per_layer)
        .map(|(layer, t)| {
            vec![
                layer.depth.to_string(),
                layer.added.to_string(),
                fmt_f64(layer.norm),
                fmt_f64(*t),
            ]
        })
        .collect();
    let headline = format!(
        "hierarchy depth {} within [{k_low}, {k_high}]; total time estimate {:.4e}",
        decomp.depth, estimate.total
    );
    Ok(RunArtifacts {
        outputs: Outputs::SpeedEstimate {
            epsilon,
            depth: decomp.depth,
            residual: decomp.residual,
            layers: decomp.layers.clone(),
            estimate,
            k_low,
            k_high,
            depth_within_bounds,
        },
        headers: vec!["depth", "dims_added", "layer_norm", "t_k"],
        rows,
        pulses: None,
        extra_json: Vec::new(),
        conclusive: depth_within_bounds,
        headline,
    })
}

fn compute_controllability(config: &Config) -> CliResult<RunArtifacts> {
    let model = config.control_model()?;
    let (h0, controls) = build_hamiltonian(&model).map_err(CliError::internal)?;
    let rank = controllability_rank(&h0, &controls);
    let dim = config.system()?.dim();
    let full_rank = dim * dim - 1;
    let controllable = rank == full_rank;
    let rows = vec![vec![
        rank.to_string(),
        full_rank.to_string(),
        controllable.to_string(),
    ]];
    let headline = if controllable {
        format!("fully controllable: rank {rank} = dim su({dim})")
    } else {
        format!("not fully controllable: rank {rank} < {full_rank}")
    };
    Ok(RunArtifacts {
        outputs: Outputs::Controllability {
            rank,
            full_rank,
            controllable,
        },
        headers: vec!["rank", "full_rank", "controllable"],
        rows,
        pulses: None,
        extra_json: Vec::new(),
        conclusive: true,
        headline,
    })
}

/// Runs one resolved configuration and writes its record, summary, and
/// pulse files into `dir`. Returns the record and whether the run was
/// conclusive.
pub fn run_one(
    kind: SubKind,
    config: &Config,
    dir: &Path,
) -> CliResult<(RunRecord, RunArtifacts)> {
    let started_at = now_rfc3339();
    let start = std::time::Instant::now();
    let artifacts = compute(kind, config)?;
    let finished_at = now_rfc3339();
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        library_version: quditsynth::VERSION.to_string(),
        subcommand: kind.name().to_string(),
        master_seed: config.master_seed(),
        config: config.clone(),
        started_at,
        finished_at,
        wall_seconds: start.elapsed().as_secs_f64(),
        outputs: artifacts.outputs.clone(),
    };
    record.write(dir)?;
    write_summary(dir, &artifacts.headers, &artifacts.rows)?;
    if let Some((channels, schedule)) = &artifacts.pulses {
        write_pulses(dir, channels, schedule)?;
    }
    for (name, value) in &artifacts.extra_json {
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(path, text + "\n")?;
    }
    Ok((record, artifacts))
}

/// Runs a named suite: every fast entry, plus slow entries when asked.
/// Afterwards rebuilds the suite's results tables from the entry
/// outputs.
pub fn run_suite(
    name: &str,
    include_slow: bool,
    seed_offset: u64,
    dir: &Path,
) -> CliResult<(RunRecord, bool)> {
    let suite = suite_by_name(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown suite {name:?}; available: {}",
            suite_names().join(", ")
        ))
    })?;
    let started_at = now_rfc3339();
    let start = std::time::Instant::now();
    let mut entries = Vec::new();
    let mut gate_entries: Vec<GateCountEntry> = Vec::new();
    let mut time_entries: Vec<MinTimeEntry> = Vec::new();
    let mut all_conclusive = true;
    for entry in &suite.entries {
        if entry.slow && !include_slow {
            println!("[skip] {} (slow; use --include-slow)", entry.name);
            entries.push(crate::record::SuiteEntryOutcome {
                name: entry.name.clone(),
                slow: true,
                skipped: true,
                conclusive: None,
                record: None,
            });
            continue;
        }
        let mut config = entry.config.clone();
        if seed_offset != 0 {
            config.seed = Some(config.seed.unwrap_or(0).wrapping_add(seed_offset));
        }
        config.resolve()?;
        let entry_dir = dir.join(&entry.name);
        let (record, artifacts) = run_one(entry.kind, &config, &entry_dir)?;
        println!("[{}] {}", entry.name, artifacts.headline);
        all_conclusive &= artifacts.conclusive;
        match &record.outputs {
            Outputs::Synthesis { report } => {
                gate_entries.push(GateCountEntry::from_report(report));
            }
            Outputs::MinTime { result, .. } => {
                let system = config.system()?;
                time_entries.push(MinTimeEntry {
                    task: config.task(),
                    n: system.qudits(),
                    d: system.levels(),
                    seed: config.master_seed(),
                    t_min: result.t_min,
                    spacing: result.spacing,
                });
            }
            _ => {}
        }
        entries.push(crate::record::SuiteEntryOutcome {
            name: entry.name.clone(),
            slow: entry.slow,
            skipped: false,
            conclusive: Some(artifacts.conclusive),
            record: Some(format!("{}/record.json", entry.name)),
        });
    }
    if !gate_entries.is_empty() {
        let rows = gate_count_table(&gate_entries)?;
        let path = write_table(dir, "table1.csv", &GATE_COUNT_HEADERS, &rows)?;
        println!("gate-count table: {}", path.display());
    }
    if !time_entries.is_empty() {
        let rows = min_time_table(&time_entries);
        let path = write_table(dir, "table2.csv", &MIN_TIME_HEADERS, &rows)?;
        println!("minimum-time table: {}", path.display());
        let seed_rows = min_time_seed_rows(&time_entries);
        write_table(dir, "table2_seeds.csv", &MIN_TIME_SEED_HEADERS, &seed_rows)?;
    }
    let summary_rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                e.slow.to_string(),
                e.skipped.to_string(),
                e.conclusive.map(|c| c.to_string()).unwrap_or_default(),
                e.record.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let finished_at = now_rfc3339();
    let mut config = Config::default();
    config.seed = Some(seed_offset);
    config.resolve()?;
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        library_version: quditsynth::VERSION.to_string(),
        subcommand: "suite".to_string(),
        master_seed: seed_offset,
        config,
        started_at,
        finished_at,
        wall_seconds: start.elapsed().as_secs_f64(),
        outputs: Outputs::Suite {
            suite: suite.name.to_string(),
            entries,
        },
    };
    record.write(dir)?;
    write_summary(
        dir,
        &["entry", "slow", "skipped", "conclusive", "record"],
        &summary_rows,
    )?;
    Ok((record, all_conclusive))
}

/// Resolved global options after flag/env/default merging.
struct Globals {
    config_path: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: usize,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(format!("{ENV_PREFIX}{name}")).ok()
}

fn merge_globals(flags: &GlobalFlags) -> CliResult<Globals> {
    let config_path = flags
        .config
        .clone()
        .or_else(|| env_var("CONFIG").map(PathBuf::from));
    let seed = match (&flags.seed, env_var("SEED")) {
        (Some(s), _) => Some(*s),
        (None, Some(text)) => Some(text.parse::<u64>().map_err(|e| {
            CliError::Config(format!("bad {ENV_PREFIX}SEED {text:?}: {e}"))
        })?),
        (None, None) => None,
    };
    let out = flags.out.clone().or_else(|| env_var("OUT").map(PathBuf::from));
    let serial = flags.serial
        || env_var("SERIAL").is_some_and(|v| v == "1" || v.eq_ignore_ascii_case("true"));
    let workers = match (&flags.workers, env_var("WORKERS")) {
        (Some(w), _) => Some(*w),
        (None, Some(text)) => Some(text.parse::<usize>().map_err(|e| {
            CliError::Config(format!("bad {ENV_PREFIX}WORKERS {text:?}: {e}"))
        })?),
        (None, None) => None,
    };
    if workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let threads = if serial { 1 } else { workers.unwrap_or(0) };
    Ok(Globals {
        config_path,
        seed,
        out,
        threads,
    })
}

/// Executes a parsed command line. Returns whether the run was
/// conclusive.
pub fn execute(cli: &Cli) -> CliResult<bool> {
    let globals = merge_globals(&cli.globals)?;
    let mut config = match &globals.config_path {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    if let Some(seed) = globals.seed {
        config.seed = Some(seed);
    }
    apply_command_flags(&mut config, &cli.command);
    config.resolve()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(globals.threads)
        .build()
        .map_err(CliError::internal)?;

    match &cli.command {
        Command::Suite { name, include_slow } => {
            let dir = globals
                .out
                .unwrap_or_else(|| PathBuf::from("runs").join(format!("suite-{name}")));
            let seed_offset = config.master_seed();
            let (record, conclusive) =
                pool.install(|| run_suite(name, *include_slow, seed_offset, &dir))?;
            println!(
                "suite {} finished: {} entries — {}",
                name,
                match &record.outputs {
                    Outputs::Suite { entries, .. } => entries.len(),
                    _ => 0,
                },
                dir.join("record.json").display()
            );
            if !conclusive {
                return Err(CliError::Inconclusive(format!(
                    "suite {name} contains inconclusive entries; see {}",
                    dir.join("record.json").display()
                )));
            }
            Ok(true)
        }
        command => {
            let kind = match command {
                Command::Bounds { .. } => SubKind::Bounds,
                Command::GenTarget { .. } => SubKind::GenTarget,
                Command::SynthSearch { .. } => SubKind::SynthSearch,
                Command::Grape { .. } => SubKind::Grape,
                Command::MinTime { .. } => SubKind::MinTime,
                Command::SpeedEst { .. } => SubKind::SpeedEst,
                Command::Controllability { .. } => SubKind::Controllability,
                Command::Suite { .. } => unreachable!(),
            };
            let dir = globals
                .out
                .unwrap_or_else(|| PathBuf::from("runs").join(kind.name()));
            let (_, artifacts) = pool.install(|| run_one(kind, &config, &dir))?;
            println!("{}", artifacts.headline);
            println!("record: {}", dir.join("record.json").display());
            if !artifacts.conclusive {
                return Err(CliError::Inconclusive(artifacts.headline.clone()));
            }
            Ok(true)
        }
    }
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::InvalidSubcommand => EXIT_UNKNOWN_SUBCOMMAND,
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => {
                    let _ = err.print();
                    return EXIT_OK;
                }
                _ => EXIT_CONFIG,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(_) => EXIT_OK,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcommand_names_match_cli_grammar() {
        let cli = Cli::try_parse_from(["quditsynth", "bounds", "--n-max", "3"]).unwrap();
        assert_eq!(cli.command.name(), "bounds");
        let cli = Cli::try_parse_from(["quditsynth", "min-time", "--task", "unitary"]).unwrap();
        assert_eq!(cli.command.name(), "min-time");
    }

    #[test]
    fn unknown_subcommand_is_distinguished() {
        let err = Cli::try_parse_from(["quditsynth", "frobnicate"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::InvalidSubcommand);
        let err = Cli::try_parse_from(["quditsynth", "bounds", "--bogus"]).unwrap_err();
        assert_ne!(err.kind(), clap::error::ErrorKind::InvalidSubcommand);
    }

    #[test]
    fn flags_override_config_fields() {
        let mut config = Config::default();
        let cli = Cli::try_parse_from([
            "quditsynth",
            "synth-search",
            "--n",
            "3",
            "--d",
            "2",
            "--task",
            "unitary",
            "--trials",
            "7",
        ])
        .unwrap();
        apply_command_flags(&mut config, &cli.command);
        assert_eq!(config.system, Some(SystemCfg { n: 3, d: 2 }));
        assert_eq!(config.task, Some(Task::UnitarySynth));
        assert_eq!(
            config.search.strategy,
            Some(SearchStrategy::Probabilistic { trials: 7 })
        );
    }

    #[test]
    fn bounds_compute_covers_both_tasks() {
        let mut config = Config::default();
        config.bounds.n_max = Some(4);
        config.bounds.d_max = Some(4);
        config.resolve().unwrap();
        let artifacts = compute(SubKind::Bounds, &config).unwrap();
        assert_eq!(artifacts.rows.len(), 18);
        // the (n=3, d=2, unitary) row
        assert!(artifacts
            .rows
            .iter()
            .any(|r| r == &vec!["3", "2", "unitary", "cz", "14"]));
    }

    #[test]
    fn controllability_compute_reports_full_rank() {
        let mut config = Config::default();
        config.resolve().unwrap();
        let artifacts = compute(SubKind::Controllability, &config).unwrap();
        match artifacts.outputs {
            Outputs::Controllability {
                rank,
                full_rank,
                controllable,
            } => {
                assert_eq!(rank, 15);
                assert_eq!(full_rank, 15);
                assert!(controllable);
            }
            _ => panic!("wrong outputs kind"),
        }
    }

    #[test]
    fn speed_est_depth_is_within_bounds() {
        let mut config = Config::default();
        config.resolve().unwrap();
        let artifacts = compute(SubKind::SpeedEst, &config).unwrap();
        match artifacts.outputs {
            Outputs::SpeedEstimate {
                depth,
                k_low,
                k_high,
                depth_within_bounds,
                ..
            } => {
                assert_eq!((k_low, k_high), (2, 10));
                assert_eq!(depth, 5);
                assert!(depth_within_bounds);
            }
            _ => panic!("wrong outputs kind"),
        }
    }
}
