// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! The circuit ansatz: CZ entanglers at chosen qudit pairs interleaved
//! with parameterized single-qudit gates.
//!
//! A circuit over `n` qudits with `N` entanglers has `n + 2N`
//! single-qudit gate slots: one initial gate per qudit, then two gates
//! after each entangler (on the two qudits just coupled). Single-qudit
//! gates are generator exponentials `exp(i Σ_a θ_a G_a)` over the
//! Gell-Mann basis; *reduced* slots use only the off-diagonal generators
//! (`d²−d` parameters), which eliminates the z-axis rotations that
//! commute through the CZ gate and would otherwise be redundant. This
//! makes the circuit's free-parameter count match
//! [`bounds::circuit_param_count`](crate::bounds::circuit_param_count)
//! exactly.
//!
//! Gates are applied left-to-right in time: slot 0 acts first. As a
//! matrix product the circuit is `op_last ⋯ op_1 op_0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::Task;
use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, CMatrix};
use crate::qcore::{embed_single_qudit, embed_two_qudit, StateVector, SystemDescriptor, UnitaryMatrix};
use crate::rng::ChaCha8Rng;
use crate::targets::gellmann_basis;

/// The two-qudit controlled-Z gate: diagonal with phase `e^{i2πkl/d}` at
/// basis state `|k,l⟩`. Its d-th power is the identity.
pub fn cz_gate(d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::BadQuditDim(d));
    }
    let dd = d * d;
    let mut m = CMatrix::zeros(dd, dd);
    for k in 0..d {
        for l in 0..d {
            let phase = 2.0 * std::f64::consts::PI * (k * l) as f64 / d as f64;
            m[(k * d + l, k * d + l)] = Complex64::from_polar(1.0, phase);
        }
    }
    Ok(m)
}

/// Parameterization mode of a single-qudit gate slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// All d²−1 generators.
    Full,
    /// Off-diagonal generators only (d²−d parameters); the coset left
    /// after eliminating redundant z-axis rotations.
    Reduced,
}

impl GateMode {
    pub fn param_len(&self, d: usize) -> usize {
        match self {
            GateMode::Full => d * d - 1,
            GateMode::Reduced => d * d - d,
        }
    }
}

/// A parameterized single-qudit gate `exp(i Σ_a θ_a G_a)`.
pub fn single_qudit_gate(params: &[f64], d: usize, mode: GateMode) -> Result<CMatrix> {
    let expect = mode.param_len(d);
    if params.len() != expect {
        return Err(Error::LengthMismatch {
            expected: expect,
            got: params.len(),
        });
    }
    let basis = gellmann_basis(d)?;
    let mut h = CMatrix::zeros(d, d);
    for (theta, g) in params.iter().zip(basis.generators()) {
        h += g * Complex64::new(*theta, 0.0);
    }
    Ok(expm_i_hermitian(&h, 1.0))
}

/// A gate configuration: the ordered pairs of qudits coupled by the
/// entangling gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitConfig {
    system: SystemDescriptor,
    pairs: Vec<(usize, usize)>,
}

impl CircuitConfig {
    /// Pairs must satisfy `a < b < n`.
    pub fn new(system: SystemDescriptor, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = system.qudits();
        for &(a, b) in &pairs {
            if a >= b {
                return Err(Error::InvalidArgument(format!(
                    "entangler pair ({a}, {b}) must be ordered a < b"
                )));
            }
            if b >= n {
                return Err(Error::IndexOutOfRange { index: b, n });
            }
        }
        Ok(Self { system, pairs })
    }

    pub fn system(&self) -> SystemDescriptor {
        self.system
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of entangling gates `N`.
    pub fn gate_count(&self) -> usize {
        self.pairs.len()
    }
}

impl<'de> Deserialize<'de> for CircuitConfig {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            system: SystemDescriptor,
            pairs: Vec<(usize, usize)>,
        }
        let raw = Raw::deserialize(de)?;
        CircuitConfig::new(raw.system, raw.pairs).map_err(serde::de::Error::custom)
    }
}

/// One single-qudit gate slot within a layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub qudit: usize,
    pub mode: GateMode,
    pub offset: usize,
    pub len: usize,
}

/// Mapping from a flat parameter vector to the circuit's gate slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    slots: Vec<Slot>,
    total: usize,
}

impl ParamLayout {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Total parameter count; equals
    /// [`bounds::circuit_param_count`](crate::bounds::circuit_param_count).
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn slice<'p>(&self, slot: usize, params: &'p [f64]) -> &'p [f64] {
        let s = &self.slots[slot];
        &params[s.offset..s.offset + s.len]
    }
}

/// Builds the parameter layout for a configuration and task: `n` initial
/// slots then two post-entangler slots per entangler. State preparation
/// marks every slot reduced (diagonal phases act trivially on `|0…0⟩`);
/// unitary synthesis marks the initial slots full and the post-entangler
/// slots reduced.
pub fn make_layout(config: &CircuitConfig, task: Task) -> ParamLayout {
    let d = config.system().levels();
    let n = config.system().qudits();
    let initial_mode = match task {
        Task::StatePrep => GateMode::Reduced,
        Task::UnitarySynth => GateMode::Full,
    };
    let mut slots = Vec::with_capacity(n + 2 * config.gate_count());
    let mut offset = 0;
    let mut push = |slots: &mut Vec<Slot>, qudit: usize, mode: GateMode| {
        let len = mode.param_len(d);
        slots.push(Slot {
            qudit,
            mode,
            offset,
            len,
        });
        offset += len;
    };
    for qudit in 0..n {
        push(&mut slots, qudit, initial_mode);
    }
    for &(a, b) in config.pairs() {
        push(&mut slots, a, GateMode::Reduced);
        push(&mut slots, b, GateMode::Reduced);
    }
    ParamLayout { slots, total: offset }
}

/// Input of a circuit evaluation: the ground state or the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitInput {
    Ground,
    Identity,
}

/// Output of a circuit evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOutput {
    State(StateVector),
    Unitary(UnitaryMatrix),
}

impl CircuitOutput {
    pub fn unwrap_state(self) -> StateVector {
        match self {
            CircuitOutput::State(s) => s,
            CircuitOutput::Unitary(_) => panic!("expected a state output"),
        }
    }

    pub fn unwrap_unitary(self) -> UnitaryMatrix {
        match self {
            CircuitOutput::Unitary(u) => u,
            CircuitOutput::State(_) => panic!("expected a unitary output"),
        }
    }
}

/// Evaluates the circuit: initial single-qudit gates, then for each
/// entangler the embedded CZ followed by its two post-entangler gates.
pub fn build_circuit(
    config: &CircuitConfig,
    layout: &ParamLayout,
    params: &[f64],
    input: CircuitInput,
) -> Result<CircuitOutput> {
    if params.len() != layout.total() {
        return Err(Error::LengthMismatch {
            expected: layout.total(),
            got: params.len(),
        });
    }
    let system = config.system();
    let d = system.levels();
    let cz = cz_gate(d)?;
    let mut slot_gates = Vec::with_capacity(layout.slots().len());
    for (i, slot) in layout.slots().iter().enumerate() {
        let g = single_qudit_gate(layout.slice(i, params), d, slot.mode)?;
        slot_gates.push(embed_single_qudit(&g, slot.qudit, system)?);
    }
    let n = system.qudits();
    match input {
        CircuitInput::Ground => {
            let mut psi = StateVector::ground(system);
            for gate in slot_gates.iter().take(n) {
                psi = gate.apply(&psi)?;
            }
            for (e, &pair) in config.pairs().iter().enumerate() {
                let czn = embed_two_qudit(&cz, pair, system)?;
                psi = czn.apply(&psi)?;
                psi = slot_gates[n + 2 * e].apply(&psi)?;
                psi = slot_gates[n + 2 * e + 1].apply(&psi)?;
            }
            Ok(CircuitOutput::State(psi))
        }
        CircuitInput::Identity => {
            let dim = system.dim();
            let mut u = CMatrix::identity(dim, dim);
            for gate in slot_gates.iter().take(n) {
                u = gate.entries() * u;
            }
            for (e, &pair) in config.pairs().iter().enumerate() {
                let czn = embed_two_qudit(&cz, pair, system)?;
                u = czn.entries() * u;
                u = slot_gates[n + 2 * e].entries() * u;
                u = slot_gates[n + 2 * e + 1].entries() * u;
            }
            Ok(CircuitOutput::Unitary(UnitaryMatrix::new(system, u)?))
        }
    }
}

/// All qudit pairs `(a, b)` with `a < b`, lexicographic.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Lexicographic enumeration of all `[n(n−1)/2]^N` gate configurations.
pub fn enumerate_configs(
    system: SystemDescriptor,
    gate_count: usize,
) -> impl Iterator<Item = CircuitConfig> {
    ConfigEnumerator {
        system,
        pairs: all_pairs(system.qudits()),
        digits: vec![0; gate_count],
        done: false,
    }
}

/// Total number of configurations enumerated by [`enumerate_configs`].
pub fn config_count(n: usize, gate_count: usize) -> u128 {
    let pairs = (n * (n - 1) / 2) as u128;
    pairs.pow(gate_count as u32)
}

struct ConfigEnumerator {
    system: SystemDescriptor,
    pairs: Vec<(usize, usize)>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for ConfigEnumerator {
    type Item = CircuitConfig;

    fn next(&mut self) -> Option<CircuitConfig> {
        if self.done || (self.pairs.is_empty() && !self.digits.is_empty()) {
            return None;
        }
        let config = CircuitConfig {
            system: self.system,
            pairs: self.digits.iter().map(|&i| self.pairs[i]).collect(),
        };
        // odometer increment, most significant digit first
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < self.pairs.len() {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(config)
    }
}

/// A uniformly random configuration of `gate_count` entanglers.
pub fn sample_config(
    system: SystemDescriptor,
    gate_count: usize,
    rng: &mut ChaCha8Rng,
) -> CircuitConfig {
    use rand::Rng;
    let pairs = all_pairs(system.qudits());
    let chosen = (0..gate_count)
        .map(|_| pairs[rng.gen_range(0..pairs.len())])
        .collect();
    CircuitConfig {
        system,
        pairs: chosen,
    }
}

/// Serialized form of a parameterized circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SerializedCircuit {
    pub system: SystemDescriptor,
    pub pairs: Vec<(usize, usize)>,
    pub task: Task,
    pub params: Vec<f64>,
}

impl SerializedCircuit {
    pub fn new(config: &CircuitConfig, task: Task, params: Vec<f64>) -> Self {
        Self {
            system: config.system(),
            pairs: config.pairs().to_vec(),
            task,
            params,
        }
    }

    /// Rebuilds the circuit output this serialization describes.
    pub fn build(&self) -> Result<CircuitOutput> {
        let config = CircuitConfig::new(self.system, self.pairs.clone())?;
        let layout = make_layout(&config, self.task);
        let input = match self.task {
            Task::StatePrep => CircuitInput::Ground,
            Task::UnitarySynth => CircuitInput::Identity,
        };
        build_circuit(&config, &layout, &self.params, input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_deviation, CVector, ONE};
    use crate::qcore::state_fidelity;
    use approx::assert_relative_eq;

    #[test]
    fn cz_qubit_and_qutrit() {
        let cz = cz_gate(2).unwrap();
        for (i, expect) in [ONE, ONE, ONE, -ONE].iter().enumerate() {
            assert!((cz[(i, i)] - expect).norm() < 1e-15);
        }
        let cz3 = cz_gate(3).unwrap();
        // entry at (k,l) = (2,2): e^{i8π/3} = e^{i2π/3}
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((cz3[(8, 8)] - expect).norm() < 1e-14);
        assert!(cz_gate(1).is_err());
    }

    #[test]
    fn cz_dth_power_is_identity() {
        for d in 2..=4 {
            let cz = cz_gate(d).unwrap();
            let mut p = CMatrix::identity(d * d, d * d);
            for _ in 0..d {
                p = &cz * p;
            }
            assert!(max_abs(&(p - CMatrix::identity(d * d, d * d))) < 1e-12);
        }
    }

    #[test]
    fn single_qudit_gate_cases() {
        let id = single_qudit_gate(&[0.0, 0.0], 2, GateMode::Reduced).unwrap();
        assert!(max_abs(&(&id - CMatrix::identity(2, 2))) < 1e-15);
        // exp(iπσx/2) = iσx
        let u = single_qudit_gate(&[std::f64::consts::FRAC_PI_2, 0.0], 2, GateMode::Reduced)
            .unwrap();
        let i = Complex64::new(0.0, 1.0);
        assert!((u[(0, 1)] - i).norm() < 1e-12 && (u[(1, 0)] - i).norm() < 1e-12);
        assert!((u[(0, 0)].norm()) < 1e-12);
        // full d=3 with random params stays unitary
        let params: Vec<f64> = (0..8).map(|k| 0.3 * k as f64 - 1.0).collect();
        let u = single_qudit_gate(&params, 3, GateMode::Full).unwrap();
        assert!(unitarity_deviation(&u) <= 1e-10);
        assert!(single_qudit_gate(&[0.0], 2, GateMode::Reduced).is_err());
    }

    #[test]
    fn layout_matches_param_counts() {
        use crate::bounds::circuit_param_count;
        for n in 2..=4 {
            for d in 2..=4 {
                let sys = SystemDescriptor::new(n, d).unwrap();
                for big_n in 0..=6 {
                    let pairs = vec![(0, 1); big_n];
                    let config = CircuitConfig::new(sys, pairs).unwrap();
                    for task in Task::ALL {
                        let layout = make_layout(&config, task);
                        assert_eq!(layout.slots().len(), n + 2 * big_n);
                        assert_eq!(
                            layout.total() as i128,
                            circuit_param_count(n, d, big_n, task),
                            "n={n} d={d} N={big_n} {task:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn build_trivial_circuits() {
        let sys = SystemDescriptor::new(2, 2).unwrap();
        let config = CircuitConfig::new(sys, vec![]).unwrap();
        let layout = make_layout(&config, Task::UnitarySynth);
        let out = build_circuit(&config, &layout, &vec![0.0; layout.total()], CircuitInput::Identity)
            .unwrap()
            .unwrap_unitary();
        assert_eq!(out.entries(), UnitaryMatrix::identity(sys).entries());

        let config = CircuitConfig::new(sys, vec![(0, 1)]).unwrap();
        let layout = make_layout(&config, Task::StatePrep);
        let out = build_circuit(&config, &layout, &vec![0.0; layout.total()], CircuitInput::Ground)
            .unwrap()
            .unwrap_state();
        let ground = StateVector::ground(sys);
        assert_relative_eq!(state_fidelity(&out, &ground).unwrap(), 1.0, epsilon = 1e-12);
    }

    /// Hand-solved Bell preparation: slot parameters (θx, θy) per slot of
    /// (0, −π/4), (0, −π/4), (0, 0), (0, π/4) produce (|00⟩ − |11⟩)/√2.
    #[test]
    fn bell_state_oracle() {
        let sys = SystemDescriptor::new(2, 2).unwrap();
        let config = CircuitConfig::new(sys, vec![(0, 1)]).unwrap();
        let layout = make_layout(&config, Task::StatePrep);
        let q = std::f64::consts::FRAC_PI_4;
        let params = [0.0, -q, 0.0, -q, 0.0, 0.0, 0.0, q];
        let out = build_circuit(&config, &layout, &params, CircuitInput::Ground)
            .unwrap()
            .unwrap_state();
        let bell = StateVector::new(
            sys,
            CVector::from_vec(vec![
                ONE,
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                -ONE,
            ]),
        )
        .unwrap();
        assert_relative_eq!(state_fidelity(&out, &bell).unwrap(), 1.0, epsilon = 1e-12);
    }

    /// The redundancy premise: diagonal phase gates on the coupled qudits
    /// commute with the embedded CZ.
    #[test]
    fn cz_commutes_with_diagonal_gates() {
        use rand::SeedableRng;
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in 2..=3 {
            let sys = SystemDescriptor::new(3, d).unwrap();
            let cz = embed_two_qudit(&cz_gate(d).unwrap(), (0, 2), sys).unwrap();
            let mut z = CMatrix::identity(sys.dim(), sys.dim());
            for qudit in [0usize, 2] {
                let phases = CMatrix::from_fn(d, d, |r, c| {
                    if r == c {
                        Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                z = embed_single_qudit(&phases, qudit, sys).unwrap().entries() * z;
            }
            let lhs = cz.entries() * &z;
            let rhs = z * cz.entries();
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        let sys2 = SystemDescriptor::new(2, 2).unwrap();
        assert_eq!(enumerate_configs(sys2, 3).count(), 1);
        let sys3 = SystemDescriptor::new(3, 2).unwrap();
        let configs: Vec<_> = enumerate_configs(sys3, 2).collect();
        assert_eq!(configs.len(), 9);
        assert_eq!(config_count(3, 2), 9);
        assert_eq!(configs[0].pairs(), &[(0, 1), (0, 1)]);
        assert_eq!(configs[1].pairs(), &[(0, 1), (0, 2)]);
        assert_eq!(configs[8].pairs(), &[(1, 2), (1, 2)]);
        let sys4 = SystemDescriptor::new(4, 2).unwrap();
        assert_eq!(enumerate_configs(sys4, 1).count(), 6);
        // N = 0: exactly the empty configuration
        assert_eq!(enumerate_configs(sys2, 0).count(), 1);
    }

    #[test]
    fn sampling_is_uniform_enough() {
        use rand::SeedableRng;
        let sys = SystemDescriptor::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            let c = sample_config(sys, 1, &mut rng);
            let idx = all_pairs(3).iter().position(|p| p == &c.pairs()[0]).unwrap();
            counts[idx] += 1;
        }
        for &c in &counts {
            assert!((c as f64 - 1000.0).abs() < 150.0, "counts {counts:?}");
        }
    }

    #[test]
    fn serialization_round_trip() {
        let sys = SystemDescriptor::new(2, 2).unwrap();
        let config = CircuitConfig::new(sys, vec![(0, 1)]).unwrap();
        let q = std::f64::consts::FRAC_PI_4;
        let params = vec![0.0, -q, 0.0, -q, 0.0, 0.0, 0.0, q];
        let ser = SerializedCircuit::new(&config, Task::StatePrep, params.clone());
        let json = serde_json::to_string(&ser).unwrap();
        let back: SerializedCircuit = serde_json::from_str(&json).unwrap();
        let a = ser.build().unwrap().unwrap_state();
        let b = back.build().unwrap().unwrap_state();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn config_validation() {
        let sys = SystemDescriptor::new(2, 2).unwrap();
        assert!(CircuitConfig::new(sys, vec![(1, 0)]).is_err());
        assert!(CircuitConfig::new(sys, vec![(0, 2)]).is_err());
        assert!(CircuitConfig::new(sys, vec![(0, 0)]).is_err());
    }
}
