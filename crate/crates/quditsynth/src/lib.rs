// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Complexity of random multi-qudit states and unitaries.
//!
//! This crate quantifies two notions of complexity for synthesizing
//! generic (Haar-random) quantum states and unitaries on registers of
//! `n` qudits with `d` levels each:
//!
//! * **Computational complexity** — the minimum number of two-qudit
//!   entangling gates (controlled-Z, together with arbitrary single-qudit
//!   gates) needed for exact synthesis. Parameter-counting lower bounds
//!   live in [`bounds`]; numerical circuit searches that match them live
//!   in [`synth`] on top of the circuit templates in [`circuits`].
//! * **Physical complexity** — the minimum evolution time needed to
//!   realize a target under a hardware-style control Hamiltonian.
//!   Piecewise-constant pulse optimization and minimum-time sweeps live
//!   in [`control`]; commutator-hierarchy speed estimates that bound the
//!   reachable time live in [`speedest`].
//!
//! Shared infrastructure: [`qcore`] (registers, states, unitaries,
//! fidelities), [`targets`] (Haar-random target generation and the
//! generalized Gell-Mann basis), [`linalg`] (Hermitian/unitary
//! eigendecompositions, matrix exponentials and their derivatives),
//! [`optim`] (limited-memory BFGS), and [`rng`] (deterministic seed
//! derivation).
//!
//! # Conventions
//!
//! * Basis indices are big-endian in the qudit label: qudit 0 is the most
//!   significant digit.
//! * Fidelities are global-phase invariant: `|⟨a|b⟩|²` for states and
//!   `|Tr(U†V)|²/D²` for unitaries.
//! * All randomness flows from a single master seed through the stream
//!   derivation in [`rng`], so runs are reproducible and parallel
//!   execution is bit-identical to serial execution.
//!
//! # Example
//!
//! ```
//! use quditsynth::bounds::{cz_lower_bound, Task};
//!
//! // A generic two-qutrit state needs at least one controlled-Z gate...
//! assert_eq!(cz_lower_bound(2, 3, Task::StatePrep), 1);
//! // ...and a generic two-qutrit unitary at least six.
//! assert_eq!(cz_lower_bound(2, 3, Task::UnitarySynth), 6);
//! ```

pub mod bounds;
pub mod circuits;
pub mod control;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod qcore;
pub mod rng;
pub mod speedest;
pub mod synth;
pub mod targets;

pub use error::{Error, Result};
pub use qcore::{StateVector, SystemDescriptor, UnitaryMatrix};

/// Library version, embedded in run records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
