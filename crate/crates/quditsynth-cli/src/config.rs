// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a single JSON document with per-subcommand
//! sections. Every field is optional in the file; [`Config::resolve`]
//! materializes all defaults so the configuration embedded in a run
//! record is complete and re-running it needs no hidden state.
//! Precedence: command-line flags > `QUDITSYNTH_*` environment
//! variables > config file > built-in defaults.

use serde::{Deserialize, Serialize};

use quditsynth::bounds::{cz_lower_bound, Entangler, Task};
use quditsynth::circuits::cz_gate;
use quditsynth::control::{
    default_slices, ChannelPolicy, Coupling, Frame, GrapeSettings, HamiltonianModel,
    SweepSettings,
};
use quditsynth::qcore::{SystemDescriptor, UnitaryMatrix};
use quditsynth::synth::{OptimizerSettings, SearchStrategy, SynthesisProblem};
use quditsynth::targets::{random_target, RandomTargetSpec, Target, DEFAULT_RANDOMIZATION_STEPS};

use crate::error::{CliError, CliResult};

/// Register shape as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemCfg {
    pub n: usize,
    pub d: usize,
}

impl Default for SystemCfg {
    fn default() -> Self {
        Self { n: 2, d: 2 }
    }
}

impl SystemCfg {
    pub fn descriptor(&self) -> CliResult<SystemDescriptor> {
        SystemDescriptor::new(self.n, self.d).map_err(CliError::config)
    }
}

/// What the physical-target subcommands act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelector {
    /// Seeded Haar-random target of the configured task.
    #[default]
    Random,
    /// The two-qudit controlled-Z gate (unitary tasks, n = 2 only).
    Cz,
}

/// `bounds` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsCfg {
    pub n_max: Option<usize>,
    pub d_max: Option<usize>,
    pub entangler: Option<Entangler>,
}

/// `search` section (circuit synthesis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SearchCfg {
    pub strategy: Option<SearchStrategy>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub iters_per_param: Option<usize>,
    pub success_threshold: Option<f64>,
    pub init_range: Option<f64>,
    /// First gate count tried; the default is the lower bound.
    pub start_gates: Option<usize>,
    /// Last gate count tried; the default is the lower bound + 4.
    pub gate_cap: Option<usize>,
}

/// `model` section (control Hamiltonian overrides).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ModelCfg {
    pub omegas: Option<Vec<f64>>,
    pub etas: Option<Vec<f64>>,
    pub g: Option<f64>,
    pub policy: Option<ChannelPolicy>,
    pub frame: Option<Frame>,
    pub coupling: Option<Coupling>,
}

impl ModelCfg {
    /// Fills every field from the standard model for `system`.
    fn materialize(&mut self, system: SystemDescriptor) {
        let std_model = HamiltonianModel::standard(system);
        self.omegas.get_or_insert(std_model.omegas);
        self.etas.get_or_insert(std_model.etas);
        self.g.get_or_insert(std_model.g);
        self.policy.get_or_insert(std_model.policy);
        self.frame.get_or_insert(std_model.frame);
        self.coupling.get_or_insert(std_model.coupling);
    }

    pub fn model(&self, system: SystemDescriptor) -> CliResult<HamiltonianModel> {
        let mut model = HamiltonianModel::standard(system);
        if let Some(v) = &self.omegas {
            model.omegas = v.clone();
        }
        if let Some(v) = &self.etas {
            model.etas = v.clone();
        }
        if let Some(g) = self.g {
            model.g = g;
        }
        if let Some(p) = self.policy {
            model.policy = p;
        }
        if let Some(f) = self.frame {
            model.frame = f;
        }
        if let Some(c) = self.coupling {
            model.coupling = c;
        }
        model.validate().map_err(CliError::config)?;
        Ok(model)
    }
}

/// Slice-count policy: `"auto"` (scales with pulse time) or a fixed
/// integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlicePolicy {
    #[default]
    Auto,
    Fixed(usize),
}

impl SlicePolicy {
    pub fn slices_for(&self, t_over_tcz2: f64) -> usize {
        match self {
            SlicePolicy::Auto => default_slices(t_over_tcz2),
            SlicePolicy::Fixed(s) => *s,
        }
    }
}

impl Serialize for SlicePolicy {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            SlicePolicy::Auto => ser.serialize_str("auto"),
            SlicePolicy::Fixed(s) => ser.serialize_u64(*s as u64),
        }
    }
}

impl<'de> Deserialize<'de> for SlicePolicy {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Count(usize),
        }
        match Raw::deserialize(de)? {
            Raw::Text(s) if s == "auto" => Ok(SlicePolicy::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "slices must be \"auto\" or an integer, got {s:?}"
            ))),
            Raw::Count(0) => Err(serde::de::Error::custom("slice count must be positive")),
            Raw::Count(s) => Ok(SlicePolicy::Fixed(s)),
        }
    }
}

/// `grape` section (single pulse optimization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GrapeCfg {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub init_amp_rel: Option<f64>,
    pub amplitude_bound: Option<f64>,
    /// Pulse time in units of `T_CZ2 = π/(4g)`.
    pub time: Option<f64>,
    pub slices: Option<SlicePolicy>,
}

impl GrapeCfg {
    fn materialize(&mut self) {
        let defaults = GrapeSettings::default();
        self.restarts.get_or_insert(defaults.restarts);
        self.max_iters.get_or_insert(defaults.max_iters);
        self.init_amp_rel.get_or_insert(defaults.init_amp_rel);
        self.time.get_or_insert(1.0);
        self.slices.get_or_insert(SlicePolicy::Auto);
    }

    pub fn settings(&self) -> GrapeSettings {
        let defaults = GrapeSettings::default();
        GrapeSettings {
            restarts: self.restarts.unwrap_or(defaults.restarts),
            max_iters: self.max_iters.unwrap_or(defaults.max_iters),
            init_amp_rel: self.init_amp_rel.unwrap_or(defaults.init_amp_rel),
            amplitude_bound: self.amplitude_bound,
        }
    }
}

/// `sweep` section (minimum-time search).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepCfg {
    pub threshold: Option<f64>,
    pub ratio: Option<f64>,
    /// In `T_CZ2` units; defaults depend on the task.
    pub t_start: Option<f64>,
    pub t_cap: Option<f64>,
}

/// `speedest` section (commutator-hierarchy estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedestCfg {
    /// Deformation strength ε.
    pub epsilon: Option<f64>,
    /// Rate scale H̄; default is the HS norm of `H0 + Σ_j H_j`.
    pub hbar: Option<f64>,
    /// Seed for the deformation direction; default is the master seed.
    pub deform_seed: Option<u64>,
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub system: Option<SystemCfg>,
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub randomization_steps: Option<usize>,
    pub target: Option<TargetSelector>,
    pub bounds: BoundsCfg,
    pub search: SearchCfg,
    pub model: ModelCfg,
    pub grape: GrapeCfg,
    pub sweep: SweepCfg,
    pub speedest: SpeedestCfg,
}

impl Config {
    pub fn from_file(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Materializes every default into concrete values. Resolution is
    /// idempotent: resolving an already-resolved configuration changes
    /// nothing, so run records can be reloaded and re-run verbatim.
    pub fn resolve(&mut self) -> CliResult<()> {
        let system_cfg = *self.system.get_or_insert_with(SystemCfg::default);
        let system = system_cfg.descriptor()?;
        let task = *self.task.get_or_insert(Task::StatePrep);
        self.seed.get_or_insert(0);
        self.randomization_steps
            .get_or_insert(DEFAULT_RANDOMIZATION_STEPS);
        self.target.get_or_insert(TargetSelector::Random);

        self.bounds.n_max.get_or_insert(4);
        self.bounds.d_max.get_or_insert(4);
        self.bounds.entangler.get_or_insert(Entangler::Cz);
        if self.bounds.n_max.unwrap() < 2 || self.bounds.d_max.unwrap() < 2 {
            return Err(CliError::Config(
                "bounds.n_max and bounds.d_max must be at least 2".into(),
            ));
        }

        let optimizer_defaults = OptimizerSettings::default();
        self.search
            .strategy
            .get_or_insert(SearchStrategy::Exhaustive);
        self.search.restarts.get_or_insert(optimizer_defaults.restarts);
        self.search
            .max_iters
            .get_or_insert(optimizer_defaults.max_iters);
        self.search
            .iters_per_param
            .get_or_insert(optimizer_defaults.iters_per_param);
        self.search
            .success_threshold
            .get_or_insert(optimizer_defaults.success_threshold);
        self.search
            .init_range
            .get_or_insert(optimizer_defaults.init_range);
        let bound = cz_lower_bound(system.qudits(), system.levels(), task) as usize;
        self.search.start_gates.get_or_insert(bound);
        self.search.gate_cap.get_or_insert(bound + 4);
        if self.search.gate_cap < self.search.start_gates {
            return Err(CliError::Config(format!(
                "search.gate_cap {} below search.start_gates {}",
                self.search.gate_cap.unwrap(),
                self.search.start_gates.unwrap()
            )));
        }

        self.model.materialize(system);
        self.model.model(system)?;

        self.grape.materialize();

        let sweep_defaults = SweepSettings::for_task(task);
        self.sweep.threshold.get_or_insert(sweep_defaults.threshold);
        self.sweep.ratio.get_or_insert(sweep_defaults.ratio);
        self.sweep.t_start.get_or_insert(sweep_defaults.t_start);
        self.sweep.t_cap.get_or_insert(sweep_defaults.t_cap);
        if self.sweep.ratio.unwrap() <= 1.0 {
            return Err(CliError::Config("sweep.ratio must exceed 1".into()));
        }

        self.speedest.epsilon.get_or_insert(1e-3);
        self.speedest.deform_seed.get_or_insert(self.seed.unwrap());
        if let Some(hbar) = self.speedest.hbar {
            if !(hbar > 0.0) {
                return Err(CliError::Config("speedest.hbar must be positive".into()));
            }
        }
        Ok(())
    }

    // accessors for resolved values (panic-free after resolve())

    pub fn system(&self) -> CliResult<SystemDescriptor> {
        self.system.unwrap_or_default().descriptor()
    }

    pub fn task(&self) -> Task {
        self.task.unwrap_or(Task::StatePrep)
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let defaults = SweepSettings::for_task(self.task());
        SweepSettings {
            threshold: self.sweep.threshold.unwrap_or(defaults.threshold),
            ratio: self.sweep.ratio.unwrap_or(defaults.ratio),
            t_start: self.sweep.t_start.unwrap_or(defaults.t_start),
            t_cap: self.sweep.t_cap.unwrap_or(defaults.t_cap),
            grape: self.grape.settings(),
            slices: match self.grape.slices.unwrap_or_default() {
                SlicePolicy::Auto => None,
                SlicePolicy::Fixed(s) => Some(s),
            },
        }
    }

    /// The target of a physical or synthesis run.
    pub fn build_target(&self) -> CliResult<Target> {
        let system = self.system()?;
        let task = self.task();
        match self.target.unwrap_or_default() {
            TargetSelector::Random => {
                let spec = RandomTargetSpec::new(system, task, self.master_seed())
                    .with_steps(self.randomization_steps.unwrap_or(DEFAULT_RANDOMIZATION_STEPS));
                random_target(&spec).map_err(CliError::config)
            }
            TargetSelector::Cz => {
                if task != Task::UnitarySynth {
                    return Err(CliError::Config(
                        "target \"cz\" requires task \"unitary_synth\"".into(),
                    ));
                }
                if system.qudits() != 2 {
                    return Err(CliError::Config(
                        "target \"cz\" is defined for exactly two qudits".into(),
                    ));
                }
                let gate = cz_gate(system.levels()).map_err(CliError::config)?;
                Ok(Target::Unitary(
                    UnitaryMatrix::new(system, gate).map_err(CliError::config)?,
                ))
            }
        }
    }

    /// The generation spec behind a `random` target.
    pub fn random_spec(&self) -> CliResult<RandomTargetSpec> {
        Ok(
            RandomTargetSpec::new(self.system()?, self.task(), self.master_seed()).with_steps(
                self.randomization_steps
                    .unwrap_or(DEFAULT_RANDOMIZATION_STEPS),
            ),
        )
    }

    pub fn synthesis_problem(&self) -> CliResult<SynthesisProblem> {
        let target = self.build_target()?;
        let mut problem = SynthesisProblem::new(
            target,
            self.search.strategy.unwrap_or(SearchStrategy::Exhaustive),
            self.master_seed(),
        );
        let defaults = OptimizerSettings::default();
        problem.settings = OptimizerSettings {
            restarts: self.search.restarts.unwrap_or(defaults.restarts),
            max_iters: self.search.max_iters.unwrap_or(defaults.max_iters),
            iters_per_param: self
                .search
                .iters_per_param
                .unwrap_or(defaults.iters_per_param),
            success_threshold: self
                .search
                .success_threshold
                .unwrap_or(defaults.success_threshold),
            init_range: self.search.init_range.unwrap_or(defaults.init_range),
        };
        problem.start_gates = self.search.start_gates;
        problem.gate_cap = self.search.gate_cap;
        Ok(problem)
    }

    pub fn control_model(&self) -> CliResult<HamiltonianModel> {
        self.model.model(self.system()?)
    }
}
