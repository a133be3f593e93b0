// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form parameter counting and circuit-size lower bounds.
//!
//! A circuit of `N` entangling gates interleaved with parameterized
//! single-qudit gates exposes a calculable number of free parameters;
//! matching that against the number of parameters required to reach an
//! arbitrary target yields a lower bound on `N`. All arithmetic is exact
//! integer arithmetic with ceiling division — no floating point.
//!
//! The key counts, for `n` qudits of dimension `d`:
//!
//! * target parameters: `2·d^n − 2` (states), `d^{2n} − 1` (unitaries);
//! * circuit parameters: `d(d−1)(n + 2N)` (state preparation),
//!   `(d²−1)n + 2d(d−1)N` (unitary synthesis) for the CZ entangler,
//!   whose commutation with z-axis rotations removes `d−1` parameters
//!   from each post-entangler single-qudit gate;
//! * the resulting bounds, with the denominator `2d(d−1)` replaced by
//!   `2(d²−1)` for an entangler that commutes with no single-qudit gate.

use serde::{Deserialize, Serialize};

/// What is being synthesized: a state from `|0…0⟩`, or a full unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[serde(alias = "state")]
    StatePrep,
    #[serde(alias = "unitary")]
    UnitarySynth,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::StatePrep, Task::UnitarySynth];

    pub fn label(&self) -> &'static str {
        match self {
            Task::StatePrep => "state",
            Task::UnitarySynth => "unitary",
        }
    }
}

/// Entangling-gate family assumed by a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// The two-qudit controlled-Z gate; commutes with z-axis rotations.
    Cz,
    /// A hypothetical entangler commuting with no single-qudit gate.
    Noncommuting,
}

impl Entangler {
    pub fn label(&self) -> &'static str {
        match self {
            Entangler::Cz => "cz",
            Entangler::Noncommuting => "noncommuting",
        }
    }
}

/// A fully specified bound query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: usize,
    pub d: usize,
    pub task: Task,
    pub entangler: Entangler,
}

fn pow(d: usize, e: usize) -> i128 {
    (d as i128).pow(e as u32)
}

/// Number of free parameters of an arbitrary target: `2·d^n − 2` for
/// states, `d^{2n} − 1` for unitaries.
pub fn target_param_count(n: usize, d: usize, task: Task) -> i128 {
    match task {
        Task::StatePrep => 2 * pow(d, n) - 2,
        Task::UnitarySynth => pow(d, 2 * n) - 1,
    }
}

/// Number of free parameters of a circuit with `N` CZ entanglers:
/// `d(d−1)(n + 2N)` for state preparation, `(d²−1)n + 2d(d−1)N` for
/// unitary synthesis.
pub fn circuit_param_count(n: usize, d: usize, big_n: usize, task: Task) -> i128 {
    let (n, d, big_n) = (n as i128, d as i128, big_n as i128);
    match task {
        Task::StatePrep => d * (d - 1) * (n + 2 * big_n),
        Task::UnitarySynth => (d * d - 1) * n + 2 * d * (d - 1) * big_n,
    }
}

/// `⌈num / den⌉` for `den > 0`, clamped below at 0.
fn ceil_div_clamped(num: i128, den: i128) -> u64 {
    debug_assert!(den > 0);
    if num <= 0 {
        0
    } else {
        ((num + den - 1) / den) as u64
    }
}

/// The circuit-size lower bound for `query`.
///
/// For the CZ entangler:
/// `N_S = ⌈(2d^n − 2 − d(d−1)n) / (2d(d−1))⌉` and
/// `N_U = ⌈(d^{2n} − 1 − (d²−1)n) / (2d(d−1))⌉`;
/// a non-commuting entangler replaces the denominator by `2(d²−1)`.
/// Negative numerators (tiny systems where local gates already suffice)
/// clamp to 0.
pub fn lower_bound(query: &BoundQuery) -> u64 {
    let BoundQuery {
        n, d, task, entangler,
    } = *query;
    let numerator = target_param_count(n, d, task) - circuit_param_count(n, d, 0, task);
    let di = d as i128;
    let denominator = match entangler {
        Entangler::Cz => 2 * di * (di - 1),
        Entangler::Noncommuting => 2 * (di * di - 1),
    };
    ceil_div_clamped(numerator, denominator)
}

/// Shorthand for the CZ-entangler bound.
pub fn cz_lower_bound(n: usize, d: usize, task: Task) -> u64 {
    lower_bound(&BoundQuery {
        n,
        d,
        task,
        entangler: Entangler::Cz,
    })
}

/// Minimum free-parameter count `d^{2n} − 2nd² + 2n − 1` of the
/// interaction generator in the canonical (Cartan-style) decomposition
/// of an `n`-qudit unitary into local layers around one entangling
/// exponential. Requires `n ≥ 2`.
pub fn canonical_param_deficit(n: usize, d: usize) -> crate::error::Result<i128> {
    if n < 2 {
        return Err(crate::error::Error::BadQuditCount(n));
    }
    let (ni, di) = (n as i128, d as i128);
    Ok(pow(d, 2 * n) - 2 * ni * di * di + 2 * ni - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_params() {
        assert_eq!(target_param_count(2, 2, Task::StatePrep), 6);
        assert_eq!(target_param_count(2, 2, Task::UnitarySynth), 15);
        assert_eq!(target_param_count(3, 3, Task::UnitarySynth), 728);
    }

    #[test]
    fn circuit_params() {
        assert_eq!(circuit_param_count(2, 2, 1, Task::StatePrep), 8);
        assert_eq!(circuit_param_count(2, 2, 3, Task::UnitarySynth), 18);
        assert_eq!(circuit_param_count(2, 3, 6, Task::UnitarySynth), 88);
    }

    /// All 18 published lower-bound entries for n, d ∈ {2, 3, 4}.
    #[test]
    fn cz_lower_bound_table() {
        let state = [
            ((2, 2), 1),
            ((3, 2), 2),
            ((4, 2), 6),
            ((2, 3), 1),
            ((3, 3), 3),
            ((4, 3), 12),
            ((2, 4), 1),
            ((3, 4), 4),
            ((4, 4), 20),
        ];
        let unitary = [
            ((2, 2), 3),
            ((3, 2), 14),
            ((4, 2), 61),
            ((2, 3), 6),
            ((3, 3), 59),
            ((4, 3), 544),
            ((2, 4), 10),
            ((3, 4), 169),
            ((4, 4), 2729),
        ];
        for ((n, d), expect) in state {
            assert_eq!(cz_lower_bound(n, d, Task::StatePrep), expect, "N_S({n},{d})");
        }
        for ((n, d), expect) in unitary {
            assert_eq!(
                cz_lower_bound(n, d, Task::UnitarySynth),
                expect,
                "N_U({n},{d})"
            );
        }
    }

    #[test]
    fn noncommuting_bounds() {
        let q = BoundQuery {
            n: 2,
            d: 2,
            task: Task::UnitarySynth,
            entangler: Entangler::Noncommuting,
        };
        assert_eq!(lower_bound(&q), 2); // ⌈9/6⌉
        // never larger than the CZ bound
        for n in 2..=6 {
            for d in 2..=4 {
                for task in Task::ALL {
                    let nc = lower_bound(&BoundQuery {
                        n,
                        d,
                        task,
                        entangler: Entangler::Noncommuting,
                    });
                    assert!(nc <= cz_lower_bound(n, d, task));
                }
            }
        }
    }

    #[test]
    fn clamps_at_zero() {
        // a single qudit needs no entangling gates
        assert_eq!(cz_lower_bound(1, 2, Task::StatePrep), 0);
        assert_eq!(cz_lower_bound(1, 4, Task::UnitarySynth), 0);
    }

    #[test]
    fn monotone_in_n() {
        for d in 2..=5 {
            for task in Task::ALL {
                let mut prev = 0;
                for n in 2..=8 {
                    let b = cz_lower_bound(n, d, task);
                    assert!(b >= prev, "bound decreased at n={n}, d={d}");
                    prev = b;
                }
            }
        }
    }

    /// A circuit at the bound has at least as many parameters as the
    /// target needs, and removing one gate always drops below.
    #[test]
    fn bound_consistency() {
        for n in 2..=8 {
            for d in 2..=5 {
                for task in Task::ALL {
                    let b = cz_lower_bound(n, d, task) as usize;
                    let need = target_param_count(n, d, task);
                    assert!(circuit_param_count(n, d, b, task) >= need);
                    let excess = circuit_param_count(n, d, b, task) - need;
                    let increment = 2 * (d as i128) * (d as i128 - 1);
                    assert!(excess < increment, "excess {excess} at n={n}, d={d}");
                    if b > 0 {
                        assert!(circuit_param_count(n, d, b - 1, task) < need);
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_deficits() {
        assert_eq!(canonical_param_deficit(2, 2).unwrap(), 3);
        assert_eq!(canonical_param_deficit(3, 2).unwrap(), 45);
        assert_eq!(canonical_param_deficit(2, 3).unwrap(), 48);
        assert!(canonical_param_deficit(1, 2).is_err());
    }
}
