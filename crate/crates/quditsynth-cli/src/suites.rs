// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Built-in experiment suites.
//!
//! A suite is a named list of preset runs. Entries tagged `slow` only
//! run under `--include-slow`; everything else finishes in a couple of
//! minutes on a laptop. Suites ending in `-small` restrict to the fast
//! entries of their full counterpart, so the two table suites come in
//! four flavors:
//!
//! * `table1-small` — gate-count searches for two-qudit systems, d = 2…4.
//! * `table1` — adds the three-qudit cells; larger cells are slow.
//! * `table2-small` — CZ pulse benchmark plus (n=2, d=2) minimum-time
//!   sweeps over five seeds.
//! * `table2` — adds d = 3, 4 and the three-qubit unitary row (slow).

use quditsynth::bounds::Task;

use crate::config::{Config, SystemCfg, TargetSelector};
use crate::runner::SubKind;
use quditsynth::synth::SearchStrategy;

pub struct SuiteEntry {
    pub name: String,
    pub slow: bool,
    pub kind: SubKind,
    pub config: Config,
}

pub struct Suite {
    pub name: &'static str,
    pub description: &'static str,
    pub entries: Vec<SuiteEntry>,
}

fn base_config(n: usize, d: usize, task: Task, seed: u64) -> Config {
    let mut config = Config::default();
    config.system = Some(SystemCfg { n, d });
    config.task = Some(task);
    config.seed = Some(seed);
    config
}

fn search_entry(
    name: impl Into<String>,
    slow: bool,
    n: usize,
    d: usize,
    task: Task,
    strategy: SearchStrategy,
) -> SuiteEntry {
    let mut config = base_config(n, d, task, 0);
    config.search.strategy = Some(strategy);
    SuiteEntry {
        name: name.into(),
        slow,
        kind: SubKind::SynthSearch,
        config,
    }
}

fn sweep_entry(name: impl Into<String>, slow: bool, n: usize, d: usize, task: Task, seed: u64) -> SuiteEntry {
    SuiteEntry {
        name: name.into(),
        slow,
        kind: SubKind::MinTime,
        config: base_config(n, d, task, seed),
    }
}

fn sweep_seeds(
    entries: &mut Vec<SuiteEntry>,
    slow: bool,
    n: usize,
    d: usize,
    task: Task,
    seeds: std::ops::Range<u64>,
) {
    for seed in seeds {
        entries.push(sweep_entry(
            format!("{}-n{}-d{}-s{}", task.label(), n, d, seed),
            slow,
            n,
            d,
            task,
            seed,
        ));
    }
}

fn table1_small_entries() -> Vec<SuiteEntry> {
    let mut entries = Vec::new();
    for task in [Task::StatePrep, Task::UnitarySynth] {
        for d in 2..=4 {
            entries.push(search_entry(
                format!("{}-n2-d{}", task.label(), d),
                false,
                2,
                d,
                task,
                SearchStrategy::Exhaustive,
            ));
        }
    }
    entries
}

fn table1_entries() -> Vec<SuiteEntry> {
    let mut entries = table1_small_entries();
    entries.push(search_entry(
        "state-n3-d2",
        false,
        3,
        2,
        Task::StatePrep,
        SearchStrategy::Exhaustive,
    ));
    entries.push(search_entry(
        "state-n3-d3",
        true,
        3,
        3,
        Task::StatePrep,
        SearchStrategy::Exhaustive,
    ));
    entries.push(search_entry(
        "state-n4-d2",
        true,
        4,
        2,
        Task::StatePrep,
        SearchStrategy::Probabilistic { trials: 100 },
    ));
    entries.push(search_entry(
        "state-n3-d4",
        true,
        3,
        4,
        Task::StatePrep,
        SearchStrategy::Probabilistic { trials: 25 },
    ));
    entries.push(search_entry(
        "unitary-n3-d2",
        true,
        3,
        2,
        Task::UnitarySynth,
        SearchStrategy::Probabilistic { trials: 10 },
    ));
    entries
}

fn cz_benchmark_entry() -> SuiteEntry {
    let mut config = base_config(2, 2, Task::UnitarySynth, 0);
    config.target = Some(TargetSelector::Cz);
    SuiteEntry {
        name: "cz-benchmark".into(),
        slow: false,
        kind: SubKind::MinTime,
        config,
    }
}

fn table2_small_entries() -> Vec<SuiteEntry> {
    let mut entries = vec![cz_benchmark_entry()];
    sweep_seeds(&mut entries, false, 2, 2, Task::StatePrep, 0..5);
    sweep_seeds(&mut entries, false, 2, 2, Task::UnitarySynth, 0..5);
    entries
}

fn table2_entries() -> Vec<SuiteEntry> {
    let mut entries = table2_small_entries();
    sweep_seeds(&mut entries, true, 2, 3, Task::StatePrep, 0..5);
    sweep_seeds(&mut entries, true, 2, 3, Task::UnitarySynth, 0..5);
    sweep_seeds(&mut entries, true, 2, 4, Task::StatePrep, 0..5);
    sweep_seeds(&mut entries, true, 2, 4, Task::UnitarySynth, 0..5);
    sweep_seeds(&mut entries, true, 3, 2, Task::UnitarySynth, 0..5);
    entries
}

pub fn builtin_suites() -> Vec<Suite> {
    vec![
        Suite {
            name: "table1-small",
            description: "two-qudit minimum gate counts, d = 2…4, exhaustive",
            entries: table1_small_entries(),
        },
        Suite {
            name: "table1",
            description: "minimum gate counts including three- and four-qudit cells",
            entries: table1_entries(),
        },
        Suite {
            name: "table2-small",
            description: "CZ pulse benchmark and (n=2, d=2) minimum times, five seeds",
            entries: table2_small_entries(),
        },
        Suite {
            name: "table2",
            description: "minimum pulse times including d = 3, 4 and three qubits",
            entries: table2_entries(),
        },
    ]
}

pub fn suite_by_name(name: &str) -> Option<Suite> {
    builtin_suites().into_iter().find(|s| s.name == name)
}

pub fn suite_names() -> Vec<&'static str> {
    builtin_suites().iter().map(|s| s.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn suite_names_are_unique_and_known() {
        let names = suite_names();
        let set: HashSet<_> = names.iter().collect();
        assert_eq!(set.len(), names.len());
        assert!(names.contains(&"table1-small"));
        assert!(names.contains(&"table2"));
        assert!(suite_by_name("nonexistent").is_none());
    }

    #[test]
    fn entry_names_are_unique_within_each_suite() {
        for suite in builtin_suites() {
            let mut seen = HashSet::new();
            for entry in &suite.entries {
                assert!(
                    seen.insert(entry.name.clone()),
                    "duplicate entry {} in {}",
                    entry.name,
                    suite.name
                );
            }
        }
    }

    #[test]
    fn entry_configs_resolve() {
        for suite in builtin_suites() {
            for entry in &suite.entries {
                let mut config = entry.config.clone();
                config.resolve().unwrap_or_else(|e| {
                    panic!("{}/{} fails to resolve: {e}", suite.name, entry.name)
                });
            }
        }
    }

    #[test]
    fn small_suites_have_no_slow_entries() {
        for name in ["table1-small", "table2-small"] {
            let suite = suite_by_name(name).unwrap();
            assert!(suite.entries.iter().all(|e| !e.slow), "{name}");
        }
    }

    #[test]
    fn full_table2_covers_higher_dimensions_as_slow_entries() {
        let suite = suite_by_name("table2").unwrap();
        let slow_cells: HashSet<(usize, usize)> = suite
            .entries
            .iter()
            .filter(|e| e.slow)
            .map(|e| {
                let s = e.config.system.unwrap();
                (s.n, s.d)
            })
            .collect();
        assert!(slow_cells.contains(&(2, 3)));
        assert!(slow_cells.contains(&(2, 4)));
        assert!(slow_cells.contains(&(3, 2)));
    }
}
