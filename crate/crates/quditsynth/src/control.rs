// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical complexity: the superconducting-style n-qudit control model,
//! piecewise-constant pulse propagation, GRAPE fidelity maximization,
//! minimum-time sweeps against a fidelity threshold, and Lie-algebra
//! controllability.
//!
//! The model Hamiltonian is `H = H0 + Σ_j f_j(t) H_j` with
//!
//! * `H0`: per-qudit level energies `ω_k j + η_k j(j−1)/2` plus an
//!   all-to-all bilinear coupling `g (a_k + a_k†) ⊗ (a_m + a_m†)`;
//! * one pair of control operators per driven transition `(j, l)` of each
//!   qudit: the two quadratures `|j⟩⟨l| + |l⟩⟨j|` and
//!   `−i|j⟩⟨l| + i|l⟩⟨j|`.
//!
//! Driving both quadratures (an I/Q-modulated drive) is what makes the
//! default model fully controllable: with a single quadrature all
//! available generators nearly commute and the reachable algebra is a
//! small fraction of su(D).
//!
//! All times are reported in units of `T_CZ2 = π/(4g)`, the minimum
//! two-qubit CZ time under this coupling. The *rotating* frame drops the
//! `ω_k` terms from `H0` and — deliberately — keeps the full coupling
//! rather than its co-rotating (RWA) part: under the RWA coupling the CZ
//! gate takes `2·T_CZ2`, which would break the unit that all reported
//! times are measured in. The RWA variant remains available through
//! [`Coupling::Rwa`].

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    exp_frechet, exp_from_eigen, herm_commutator, hermitian_eigen, hs_inner, hs_norm,
    traceless_part, CMatrix, CVector,
};
use crate::qcore::SystemDescriptor;
use crate::rng::SeedSequence;
use crate::targets::Target;

/// The reference time unit: the minimum two-qubit CZ time `π/(4g)`.
pub fn t_cz2(g: f64) -> f64 {
    std::f64::consts::PI / (4.0 * g)
}

/// Which single-qudit transitions are driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelPolicy {
    /// One-step transitions `j ↔ j+1` only (the default).
    OneStep,
    /// Every level pair `j < l`.
    AllPairs,
}

/// Reference frame for `H0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// Drops the `ω_k` terms; the coupling is kept per [`Coupling`].
    Rotating,
}

/// Form of the inter-qudit coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `g (a + a†) ⊗ (a + a†)` — preserves `T_CZ2 = π/(4g)`.
    Full,
    /// Co-rotating part only: `g (a ⊗ a† + a† ⊗ a)`.
    Rwa,
}

/// Drive quadrature of a control channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// `|j⟩⟨l| + |l⟩⟨j|`
    X,
    /// `−i|j⟩⟨l| + i|l⟩⟨j|`
    Y,
}

/// One control channel: a driven transition of one qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub qudit: usize,
    pub levels: (usize, usize),
    pub quadrature: Quadrature,
}

/// The n-qudit control model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub system: SystemDescriptor,
    /// Qudit frequencies ω_k (rad/time); irrelevant in the rotating frame.
    pub omegas: Vec<f64>,
    /// Anharmonicities η_k (rad/time).
    pub etas: Vec<f64>,
    /// Inter-qudit coupling strength (rad/time); must be positive for
    /// coupled models, zero is allowed to study the decoupled limit.
    pub g: f64,
    pub policy: ChannelPolicy,
    pub frame: Frame,
    pub coupling: Coupling,
}

/// Default coupling strength, in angular-frequency units where a typical
/// superconducting qudit would sit at a few `2π`·GHz.
pub const DEFAULT_G: f64 = 0.02 * std::f64::consts::TAU;
/// Default anharmonicity for d ≥ 3.
pub const DEFAULT_ETA: f64 = -0.05 * std::f64::consts::TAU;

impl HamiltonianModel {
    /// The standard model: rotating frame, one-step channels, full
    /// coupling, `g = 0.02·2π`, and anharmonicity `−0.05·2π` for d ≥ 3
    /// (zero for qubits, where only two levels exist).
    pub fn standard(system: SystemDescriptor) -> Self {
        let eta = if system.levels() == 2 { 0.0 } else { DEFAULT_ETA };
        Self {
            system,
            omegas: vec![0.0; system.qudits()],
            etas: vec![eta; system.qudits()],
            g: DEFAULT_G,
            policy: ChannelPolicy::OneStep,
            frame: Frame::Rotating,
            coupling: Coupling::Full,
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn t_cz2(&self) -> f64 {
        t_cz2(self.g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.system.qudits();
        if self.omegas.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.omegas.len(),
            });
        }
        if self.etas.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.etas.len(),
            });
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be finite and ≥ 0, got {}",
                self.g
            )));
        }
        Ok(())
    }

    /// The derived channel list: for every driven transition, an X and a
    /// Y quadrature channel, ordered by (qudit, levels, quadrature).
    pub fn channels(&self) -> Vec<Channel> {
        let d = self.system.levels();
        let mut out = Vec::new();
        for qudit in 0..self.system.qudits() {
            let pairs: Vec<(usize, usize)> = match self.policy {
                ChannelPolicy::OneStep => (0..d - 1).map(|j| (j, j + 1)).collect(),
                ChannelPolicy::AllPairs => {
                    let mut v = Vec::new();
                    for j in 0..d {
                        for l in (j + 1)..d {
                            v.push((j, l));
                        }
                    }
                    v
                }
            };
            for levels in pairs {
                for quadrature in [Quadrature::X, Quadrature::Y] {
                    out.push(Channel {
                        qudit,
                        levels,
                        quadrature,
                    });
                }
            }
        }
        out
    }
}

/// The annihilation operator `a = Σ_j √j |j−1⟩⟨j|` on one qudit.
pub fn ladder(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn channel_operator(channel: &Channel, d: usize) -> CMatrix {
    let (j, l) = channel.levels;
    let mut m = CMatrix::zeros(d, d);
    match channel.quadrature {
        Quadrature::X => {
            m[(j, l)] = Complex64::new(1.0, 0.0);
            m[(l, j)] = Complex64::new(1.0, 0.0);
        }
        Quadrature::Y => {
            m[(j, l)] = Complex64::new(0.0, -1.0);
            m[(l, j)] = Complex64::new(0.0, 1.0);
        }
    }
    m
}

/// Builds `(H0, [H_j])` for the model: the fixed Hamiltonian and one
/// Hermitian control operator per channel.
pub fn build_hamiltonian(model: &HamiltonianModel) -> Result<(CMatrix, Vec<CMatrix>)> {
    model.validate()?;
    let system = model.system;
    let d = system.levels();
    let n = system.qudits();
    let dim = system.dim();
    for channel in model.channels() {
        let (j, l) = channel.levels;
        if j >= l || l >= d {
            return Err(Error::IndexOutOfRange { index: l, n: d });
        }
    }

    let mut h0 = CMatrix::zeros(dim, dim);
    // single-qudit level energies
    for k in 0..n {
        let mut local = CMatrix::zeros(d, d);
        for j in 0..d {
            let omega_term = match model.frame {
                Frame::Lab => model.omegas[k] * j as f64,
                Frame::Rotating => 0.0,
            };
            let eta_term = model.etas[k] * (j * (j.saturating_sub(1))) as f64 / 2.0;
            local[(j, j)] = Complex64::new(omega_term + eta_term, 0.0);
        }
        h0 += embed_single_qudit_raw(&local, k, system);
    }
    // all-to-all coupling
    let a = ladder(d);
    let x = &a + a.adjoint();
    for k in 0..n {
        for m in (k + 1)..n {
            let term = match model.coupling {
                Coupling::Full => embed_pair_product(&x, &x, k, m, system),
                Coupling::Rwa => {
                    embed_pair_product(&a, &a.adjoint(), k, m, system)
                        + embed_pair_product(&a.adjoint(), &a, k, m, system)
                }
            };
            h0 += term * Complex64::new(model.g, 0.0);
        }
    }

    let controls = model
        .channels()
        .iter()
        .map(|ch| embed_single_qudit_raw(&channel_operator(ch, d), ch.qudit, system))
        .collect();
    Ok((h0, controls))
}

/// Embeds a d×d operator on one qudit without the unitarity check of
/// `qcore::embed_single_qudit` (these are Hermitian, not unitary).
fn embed_single_qudit_raw(op: &CMatrix, qudit: usize, system: SystemDescriptor) -> CMatrix {
    let d = system.levels();
    let n = system.qudits();
    let dim = system.dim();
    let stride = d.pow((n - 1 - qudit) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for base in 0..dim {
        if (base / stride) % d != 0 {
            continue;
        }
        for r in 0..d {
            for c in 0..d {
                out[(base + r * stride, base + c * stride)] += op[(r, c)];
            }
        }
    }
    out
}

/// Embeds `op_a ⊗ op_b` acting on qudits `(a, b)`.
fn embed_pair_product(
    op_a: &CMatrix,
    op_b: &CMatrix,
    a: usize,
    b: usize,
    system: SystemDescriptor,
) -> CMatrix {
    let d = system.levels();
    let n = system.qudits();
    let dim = system.dim();
    let sa = d.pow((n - 1 - a) as u32);
    let sb = d.pow((n - 1 - b) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for base in 0..dim {
        if (base / sa) % d != 0 || (base / sb) % d != 0 {
            continue;
        }
        for ra in 0..d {
            for ca in 0..d {
                if op_a[(ra, ca)] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for rb in 0..d {
                    for cb in 0..d {
                        out[(base + ra * sa + rb * sb, base + ca * sa + cb * sb)] +=
                            op_a[(ra, ca)] * op_b[(rb, cb)];
                    }
                }
            }
        }
    }
    out
}

/// How a schedule's total time was declared; informational tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Absolute,
    /// Multiples of `T_CZ2 = π/(4g)`.
    CzUnits,
}

/// Piecewise-constant control amplitudes on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    /// Total evolution time, always stored in absolute units.
    pub total_time: f64,
    /// How the time was originally declared.
    pub unit_tag: TimeUnit,
    /// Amplitudes, slice-major: `amplitudes[s][j]` is channel `j` during
    /// slice `s`.
    pub amplitudes: Vec<Vec<f64>>,
    /// Optional hard bound on every |amplitude|.
    pub amplitude_bound: Option<f64>,
}

impl PulseSchedule {
    pub fn zeros(total_time: f64, slices: usize, channels: usize) -> Self {
        Self {
            total_time,
            unit_tag: TimeUnit::Absolute,
            amplitudes: vec![vec![0.0; channels]; slices],
            amplitude_bound: None,
        }
    }

    /// Declares the time in `T_CZ2` units for a model with coupling `g`.
    pub fn zeros_in_cz_units(t: f64, g: f64, slices: usize, channels: usize) -> Self {
        Self {
            total_time: t * t_cz2(g),
            unit_tag: TimeUnit::CzUnits,
            amplitudes: vec![vec![0.0; channels]; slices],
            amplitude_bound: None,
        }
    }

    pub fn slices(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn channels(&self) -> usize {
        self.amplitudes.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.total_time <= 0.0 || self.amplitudes.is_empty() {
            return Err(Error::InvalidArgument(
                "schedule needs positive time and at least one slice".into(),
            ));
        }
        for row in &self.amplitudes {
            if row.len() != channels {
                return Err(Error::LengthMismatch {
                    expected: channels,
                    got: row.len(),
                });
            }
            for &a in row {
                if !a.is_finite() {
                    return Err(Error::InvalidArgument("non-finite amplitude".into()));
                }
                if let Some(bound) = self.amplitude_bound {
                    if a.abs() > bound {
                        return Err(Error::InvalidArgument(format!(
                            "amplitude {a} exceeds bound {bound}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Resamples the amplitude table onto a new slice count (nearest
    /// predecessor), used for warm starts across time-grid points.
    pub fn resampled(&self, slices: usize) -> Self {
        let old = self.slices();
        let amplitudes = (0..slices)
            .map(|s| self.amplitudes[(s * old) / slices].clone())
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }
}

impl Serialize for PulseSchedule {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            total_time: f64,
            unit_tag: TimeUnit,
            slices: usize,
            amplitudes: &'a [Vec<f64>],
            amplitude_bound: Option<f64>,
        }
        Wire {
            total_time: self.total_time,
            unit_tag: self.unit_tag,
            slices: self.slices(),
            amplitudes: &self.amplitudes,
            amplitude_bound: self.amplitude_bound,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PulseSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            total_time: f64,
            unit_tag: TimeUnit,
            amplitudes: Vec<Vec<f64>>,
            amplitude_bound: Option<f64>,
        }
        let w = Wire::deserialize(de)?;
        Ok(Self {
            total_time: w.total_time,
            unit_tag: w.unit_tag,
            amplitudes: w.amplitudes,
            amplitude_bound: w.amplitude_bound,
        })
    }
}

/// Integrates the piecewise-constant Schrödinger propagator:
/// the product over slices of `exp(−i (H0 + Σ_j f_j[s] H_j) Δt)`, slice 0
/// applied first. Each slice exponential uses a Hermitian
/// eigendecomposition.
pub fn propagate(h0: &CMatrix, controls: &[CMatrix], schedule: &PulseSchedule) -> Result<CMatrix> {
    schedule.validate(controls.len())?;
    let dim = h0.nrows();
    let dt = schedule.total_time / schedule.slices() as f64;
    let mut u = CMatrix::identity(dim, dim);
    for row in &schedule.amplitudes {
        let mut h = h0.clone();
        for (f, hj) in row.iter().zip(controls) {
            h += hj * Complex64::new(*f, 0.0);
        }
        let eig = hermitian_eigen(&h);
        u = exp_from_eigen(&eig, -dt) * u;
    }
    Ok(u)
}

// ---------------------------------------------------------------------
// GRAPE
// ---------------------------------------------------------------------

/// Settings for a single GRAPE optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrapeSettings {
    /// Fresh random initializations (a warm start, when given, is tried
    /// in addition).
    pub restarts: usize,
    pub max_iters: usize,
    /// Fresh starts draw amplitudes uniformly from `±init_amp_rel·g`.
    pub init_amp_rel: f64,
    /// Optional hard amplitude bound, applied through a smooth `tanh`
    /// reparameterization.
    pub amplitude_bound: Option<f64>,
}

impl Default for GrapeSettings {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 300,
            init_amp_rel: 2.0,
            amplitude_bound: None,
        }
    }
}

/// Result of one GRAPE optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrapeOutcome {
    pub schedule: PulseSchedule,
    pub fidelity: f64,
    pub iterations: u64,
    pub evaluations: u64,
}

/// Default slice count for a pulse of duration `t` (in `T_CZ2` units).
pub fn default_slices(t_over_tcz2: f64) -> usize {
    ((20.0 * t_over_tcz2).ceil() as usize).max(40)
}

struct GrapeEvaluator {
    h0: CMatrix,
    controls: Vec<CMatrix>,
    target: GrapeTarget,
    dim: usize,
    slices: usize,
    dt: f64,
    scale: f64,
    bound: Option<f64>,
}

enum GrapeTarget {
    State(CVector),
    Unitary(CMatrix),
}

fn trace_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

impl GrapeEvaluator {
    fn new(
        target: &Target,
        h0: CMatrix,
        controls: Vec<CMatrix>,
        total_time: f64,
        slices: usize,
        bound: Option<f64>,
    ) -> Self {
        let dim = h0.nrows();
        let (target, scale) = match target {
            Target::State(s) => (GrapeTarget::State(s.amplitudes().clone()), 1.0),
            Target::Unitary(u) => (
                GrapeTarget::Unitary(u.entries().clone()),
                1.0 / (dim as f64 * dim as f64),
            ),
        };
        Self {
            h0,
            controls,
            target,
            dim,
            slices,
            dt: total_time / slices as f64,
            scale,
            bound,
        }
    }

    fn channels(&self) -> usize {
        self.controls.len()
    }

    /// Raw parameter → physical amplitude (identity, or tanh squashing
    /// when a bound is set).
    fn amp(&self, u: f64) -> f64 {
        match self.bound {
            None => u,
            Some(b) => b * (u / b).tanh(),
        }
    }

    fn amp_grad(&self, u: f64) -> f64 {
        match self.bound {
            None => 1.0,
            Some(b) => {
                let t = (u / b).tanh();
                1.0 - t * t
            }
        }
    }

    fn amplitudes_of(&self, params: &[f64]) -> Vec<Vec<f64>> {
        (0..self.slices)
            .map(|s| {
                (0..self.channels())
                    .map(|j| self.amp(params[s * self.channels() + j]))
                    .collect()
            })
            .collect()
    }

    /// Fidelity and gradient with respect to the raw parameters.
    fn fidelity_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let channels = self.channels();
        let slices = self.slices;
        // slice Hamiltonians and their eigendecompositions
        let mut eigs = Vec::with_capacity(slices);
        let mut gates = Vec::with_capacity(slices);
        for s in 0..slices {
            let mut h = self.h0.clone();
            for (j, hj) in self.controls.iter().enumerate() {
                h += hj * Complex64::new(self.amp(params[s * channels + j]), 0.0);
            }
            let eig = hermitian_eigen(&h);
            gates.push(exp_from_eigen(&eig, -self.dt));
            eigs.push(eig);
        }
        match &self.target {
            GrapeTarget::Unitary(t) => {
                // prefixes F_s = U_{s−1}···U_0
                let mut forward = Vec::with_capacity(slices + 1);
                let mut u = CMatrix::identity(self.dim, self.dim);
                forward.push(u.clone());
                for gate in &gates {
                    u = gate * &u;
                    forward.push(u.clone());
                }
                let c = trace_prod(&t.adjoint(), &u);
                // backward: m = t† · (suffix after slice s)
                let mut m = t.adjoint();
                for s in (0..slices).rev() {
                    let w = &forward[s] * &m;
                    for j in 0..channels {
                        let du = exp_frechet(&eigs[s], -self.dt, &self.controls[j]);
                        let dc = trace_prod(&w, &du);
                        grad[s * channels + j] = 2.0
                            * self.scale
                            * (c.conj() * dc).re
                            * self.amp_grad(params[s * channels + j]);
                    }
                    m = &m * &gates[s];
                }
                c.norm_sqr() * self.scale
            }
            GrapeTarget::State(t) => {
                let mut forward = Vec::with_capacity(slices + 1);
                let mut psi = CVector::zeros(self.dim);
                psi[0] = Complex64::new(1.0, 0.0);
                forward.push(psi.clone());
                for gate in &gates {
                    psi = gate * &psi;
                    forward.push(psi.clone());
                }
                let c: Complex64 = t.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
                let mut beta = t.clone();
                for s in (0..slices).rev() {
                    for j in 0..channels {
                        let du = exp_frechet(&eigs[s], -self.dt, &self.controls[j]);
                        let dc = (beta.adjoint() * &du * &forward[s])[(0, 0)];
                        grad[s * channels + j] = 2.0
                            * self.scale
                            * (c.conj() * dc).re
                            * self.amp_grad(params[s * channels + j]);
                    }
                    beta = gates[s].adjoint() * beta;
                }
                c.norm_sqr() * self.scale
            }
        }
    }

    /// Objective without gradients; used by [`pulse_fidelity`] and by
    /// finite-difference checks.
    fn fidelity(&self, params: &[f64]) -> f64 {
        let channels = self.channels();
        let mut gates = Vec::with_capacity(self.slices);
        for s in 0..self.slices {
            let mut h = self.h0.clone();
            for (j, hj) in self.controls.iter().enumerate() {
                h += hj * Complex64::new(self.amp(params[s * channels + j]), 0.0);
            }
            gates.push(exp_from_eigen(&hermitian_eigen(&h), -self.dt));
        }
        match &self.target {
            GrapeTarget::Unitary(t) => {
                let mut u = CMatrix::identity(self.dim, self.dim);
                for gate in &gates {
                    u = gate * &u;
                }
                trace_prod(&t.adjoint(), &u).norm_sqr() * self.scale
            }
            GrapeTarget::State(t) => {
                let mut psi = CVector::zeros(self.dim);
                psi[0] = Complex64::new(1.0, 0.0);
                for gate in &gates {
                    psi = gate * &psi;
                }
                let c: Complex64 = t.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
                c.norm_sqr() * self.scale
            }
        }
    }
}

/// Maximizes the fidelity to `target` over piecewise-constant pulses of
/// duration `t_over_tcz2 · T_CZ2` with `slices` slices. Restarts run in
/// parallel; the result is the best over the warm start (if any) and
/// `settings.restarts` fresh random initializations, reduced in fixed
/// order so runs are reproducible.
#[allow(clippy::too_many_arguments)]
pub fn grape_optimize(
    target: &Target,
    model: &HamiltonianModel,
    t_over_tcz2: f64,
    slices: usize,
    settings: &GrapeSettings,
    warm: Option<&PulseSchedule>,
    seeds: &SeedSequence,
    stream_index: u64,
) -> Result<GrapeOutcome> {
    if target.system() != model.system {
        return Err(Error::DimensionMismatch {
            expected: model.system.dim(),
            got: target.system().dim(),
        });
    }
    if t_over_tcz2 <= 0.0 || slices == 0 {
        return Err(Error::InvalidArgument(
            "pulse time and slice count must be positive".into(),
        ));
    }
    let (h0, controls) = build_hamiltonian(model)?;
    let channels = controls.len();
    let total_time = t_over_tcz2 * model.t_cz2();
    let evaluator = GrapeEvaluator::new(
        target,
        h0,
        controls,
        total_time,
        slices,
        settings.amplitude_bound,
    );
    let dim_params = slices * channels;

    // start points: index 0 = warm start (when present), then fresh draws
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(settings.restarts + 1);
    if let Some(w) = warm {
        let resampled = w.resampled(slices);
        let mut flat = Vec::with_capacity(dim_params);
        for row in &resampled.amplitudes {
            flat.extend_from_slice(row);
        }
        // invert the bound transform so the warm start maps onto itself
        if let Some(b) = settings.amplitude_bound {
            for v in flat.iter_mut() {
                let clamped = (*v / b).clamp(-0.999_999, 0.999_999);
                *v = b * clamped.atanh();
            }
        }
        starts.push(flat);
    }
    let amp0 = settings.init_amp_rel * model.g;
    for r in 0..settings.restarts {
        let mut rng = seeds.stream("grape-init", stream_index * 64 + r as u64);
        starts.push((0..dim_params).map(|_| rng.gen_range(-amp0..=amp0)).collect());
    }

    let opts = crate::optim::LbfgsOptions {
        max_iters: settings.max_iters,
        ..Default::default()
    };
    let results: Vec<crate::optim::LbfgsResult> = starts
        .par_iter()
        .map(|x0| {
            crate::optim::minimize(
                |x, g| {
                    let f = evaluator.fidelity_and_gradient(x, g);
                    for gi in g.iter_mut() {
                        *gi = -*gi;
                    }
                    1.0 - f
                },
                x0,
                &opts,
            )
        })
        .collect();

    let mut iterations = 0u64;
    let mut evaluations = 0u64;
    let mut best: Option<(f64, &crate::optim::LbfgsResult)> = None;
    for r in &results {
        iterations += r.iterations as u64;
        evaluations += r.evaluations as u64;
        if !r.f.is_finite() {
            continue;
        }
        let fidelity = 1.0 - r.f;
        if best.map_or(true, |(bf, _)| fidelity > bf) {
            best = Some((fidelity, r));
        }
    }
    let (fidelity, winner) =
        best.ok_or_else(|| Error::OptimizationFailed("all GRAPE restarts diverged".into()))?;
    let schedule = PulseSchedule {
        total_time,
        unit_tag: TimeUnit::CzUnits,
        amplitudes: evaluator.amplitudes_of(&winner.x),
        amplitude_bound: settings.amplitude_bound,
    };
    Ok(GrapeOutcome {
        schedule,
        fidelity,
        iterations,
        evaluations,
    })
}

fn schedule_evaluator(
    target: &Target,
    model: &HamiltonianModel,
    schedule: &PulseSchedule,
) -> Result<GrapeEvaluator> {
    if target.system() != model.system {
        return Err(Error::DimensionMismatch {
            expected: model.system.dim(),
            got: target.system().dim(),
        });
    }
    let (h0, controls) = build_hamiltonian(model)?;
    schedule.validate(controls.len())?;
    // `bound: None` keeps the raw-amplitude parametrization: derivatives
    // are taken with respect to the stored amplitudes themselves.
    Ok(GrapeEvaluator::new(
        target,
        h0,
        controls,
        schedule.total_time,
        schedule.slices(),
        None,
    ))
}

/// Fidelity of a fixed [`PulseSchedule`] against `target` under `model`.
///
/// The schedule is taken at face value; no optimization happens. This is
/// the same objective GRAPE maximizes, exposed for external evaluation of
/// hand-built or previously optimized pulses.
pub fn pulse_fidelity(
    target: &Target,
    model: &HamiltonianModel,
    schedule: &PulseSchedule,
) -> Result<f64> {
    let evaluator = schedule_evaluator(target, model, schedule)?;
    let params: Vec<f64> = schedule.amplitudes.iter().flatten().copied().collect();
    Ok(evaluator.fidelity(&params))
}

/// Fidelity of a fixed [`PulseSchedule`] together with its gradient.
///
/// The gradient is laid out like [`PulseSchedule::amplitudes`]:
/// `gradient[s][j]` is the derivative of the fidelity with respect to the
/// amplitude of channel `j` during slice `s`. Any `amplitude_bound` on the
/// schedule only validates the stored values; the derivative is with
/// respect to the raw amplitudes, which is what a finite-difference probe
/// perturbs.
pub fn pulse_fidelity_and_gradient(
    target: &Target,
    model: &HamiltonianModel,
    schedule: &PulseSchedule,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let evaluator = schedule_evaluator(target, model, schedule)?;
    let channels = evaluator.channels();
    let params: Vec<f64> = schedule.amplitudes.iter().flatten().copied().collect();
    let mut flat = vec![0.0; params.len()];
    let fidelity = evaluator.fidelity_and_gradient(&params, &mut flat);
    let gradient = flat.chunks(channels).map(<[f64]>::to_vec).collect();
    Ok((fidelity, gradient))
}

// ---------------------------------------------------------------------
// minimum-time sweep
// ---------------------------------------------------------------------

/// Settings for a minimum-time sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    /// Fidelity threshold defining the minimum time.
    pub threshold: f64,
    /// Geometric grid ratio (~10% spacing).
    pub ratio: f64,
    /// First candidate time, in `T_CZ2` units; snapped up to the grid.
    pub t_start: f64,
    /// Give up beyond this time (inconclusive result).
    pub t_cap: f64,
    pub grape: GrapeSettings,
    /// Fixed slice count; `None` uses [`default_slices`] per grid point.
    pub slices: Option<usize>,
}

impl SweepSettings {
    pub fn for_state_prep() -> Self {
        Self {
            threshold: 0.999,
            ratio: 1.10,
            t_start: 0.15,
            t_cap: 2.5,
            grape: GrapeSettings::default(),
            slices: None,
        }
    }

    pub fn for_unitary_synth() -> Self {
        Self {
            threshold: 0.999,
            ratio: 1.10,
            t_start: 0.65,
            t_cap: 5.0,
            grape: GrapeSettings::default(),
            slices: None,
        }
    }

    pub fn for_task(task: crate::bounds::Task) -> Self {
        match task {
            crate::bounds::Task::StatePrep => Self::for_state_prep(),
            crate::bounds::Task::UnitarySynth => Self::for_unitary_synth(),
        }
    }
}

/// One evaluated grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Pulse time in `T_CZ2` units.
    pub t: f64,
    /// Best fidelity found at this time.
    pub fidelity: f64,
}

/// Result of a minimum-time sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinTimeResult {
    /// Smallest grid time with fidelity ≥ threshold, in `T_CZ2` units;
    /// `None` if the threshold was never reached below the cap.
    pub t_min: Option<f64>,
    pub trace: Vec<TracePoint>,
    /// Fractional grid spacing (ratio − 1).
    pub spacing: f64,
    pub threshold: f64,
    /// The pulse schedule that crossed the threshold.
    pub winning_schedule: Option<PulseSchedule>,
    pub iterations: u64,
    pub evaluations: u64,
}

impl MinTimeResult {
    pub fn conclusive(&self) -> bool {
        self.t_min.is_some()
    }
}

/// The geometric time grid for a sweep: powers of `ratio` anchored at
/// `1.0·T_CZ2`, covering `[t_start, t_cap]`. Anchoring guarantees the
/// benchmark time 1.0 is always a grid point.
pub fn time_grid(settings: &SweepSettings) -> Vec<f64> {
    let lr = settings.ratio.ln();
    let m_start = (settings.t_start.ln() / lr - 1e-9).ceil() as i32;
    let m_end = (settings.t_cap.ln() / lr + 1e-9).floor() as i32;
    (m_start..=m_end)
        .map(|m| settings.ratio.powi(m))
        .collect()
}

/// Sweeps the pulse time over a geometric grid, warm-starting each point
/// from the previous best schedule, and reports the first threshold
/// crossing.
pub fn min_time_sweep(
    target: &Target,
    model: &HamiltonianModel,
    settings: &SweepSettings,
    seeds: &SeedSequence,
) -> Result<MinTimeResult> {
    let grid = time_grid(settings);
    if grid.is_empty() {
        return Err(Error::InvalidArgument(
            "empty time grid; check t_start ≤ t_cap".into(),
        ));
    }
    let mut trace = Vec::with_capacity(grid.len());
    let mut warm: Option<PulseSchedule> = None;
    let mut winning = None;
    let mut t_min = None;
    let mut iterations = 0u64;
    let mut evaluations = 0u64;
    for (gi, &t) in grid.iter().enumerate() {
        let slices = settings.slices.unwrap_or_else(|| default_slices(t));
        let outcome = grape_optimize(
            target,
            model,
            t,
            slices,
            &settings.grape,
            warm.as_ref(),
            seeds,
            gi as u64,
        )?;
        iterations += outcome.iterations;
        evaluations += outcome.evaluations;
        trace.push(TracePoint {
            t,
            fidelity: outcome.fidelity,
        });
        let crossed = outcome.fidelity >= settings.threshold;
        warm = Some(outcome.schedule.clone());
        if crossed {
            t_min = Some(t);
            winning = Some(outcome.schedule);
            break;
        }
    }
    Ok(MinTimeResult {
        t_min,
        trace,
        spacing: settings.ratio - 1.0,
        threshold: settings.threshold,
        winning_schedule: winning,
        iterations,
        evaluations,
    })
}

// ---------------------------------------------------------------------
// controllability
// ---------------------------------------------------------------------

/// Dimension of the real Lie algebra generated by `{iH0, iH_j}` under
/// commutation, computed on traceless parts with Hilbert–Schmidt
/// Gram–Schmidt (rank tolerance 1e-9). Full controllability on `n`
/// qudits means `d^{2n} − 1`.
pub fn controllability_rank(h0: &CMatrix, controls: &[CMatrix]) -> usize {
    let dim = h0.nrows();
    let full = dim * dim - 1;
    let mut generators: Vec<CMatrix> = Vec::new();
    for op in std::iter::once(h0).chain(controls.iter()) {
        let t = traceless_part(op);
        if hs_norm(&t) > 1e-12 {
            generators.push(t);
        }
    }
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut frontier: Vec<usize> = Vec::new();
    for gen in &generators {
        if let Some(b) = gs_insert(&mut basis, gen) {
            frontier.push(b);
        }
    }
    while !frontier.is_empty() && basis.len() < full {
        let mut next = Vec::new();
        for &idx in &frontier {
            // the frontier element must be cloned: gs_insert grows `basis`
            let x = basis[idx].clone();
            for gen in &generators {
                let c = herm_commutator(&x, gen);
                if hs_norm(&c) <= 1e-12 {
                    continue;
                }
                if let Some(b) = gs_insert(&mut basis, &c) {
                    next.push(b);
                    if basis.len() >= full {
                        break;
                    }
                }
            }
            if basis.len() >= full {
                break;
            }
        }
        frontier = next;
    }
    basis.len()
}

/// Gram–Schmidt insertion into an HS-orthonormal Hermitian basis;
/// returns the new element's index if the residual exceeds the rank
/// tolerance.
fn gs_insert(basis: &mut Vec<CMatrix>, candidate: &CMatrix) -> Option<usize> {
    let norm = hs_norm(candidate);
    if norm <= 1e-12 {
        return None;
    }
    let mut v = candidate / Complex64::new(norm, 0.0);
    for b in basis.iter() {
        let overlap = hs_inner(b, &v);
        v -= b * overlap;
    }
    let residual = hs_norm(&v);
    if residual > 1e-9 {
        basis.push(&v / Complex64::new(residual, 0.0));
        Some(basis.len() - 1)
    } else {
        None
    }
}
