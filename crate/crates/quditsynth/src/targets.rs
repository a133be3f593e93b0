// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Random target generation and the generalized Gell-Mann basis.
//!
//! Random states and unitaries are produced by filling vectors/matrices
//! with uniform complex numbers, normalizing (Gram–Schmidt for matrices),
//! and then applying a configurable number of *randomization steps*: left
//! multiplications by independently drawn random unitaries. Products of
//! many independent random unitaries converge to the Haar distribution,
//! which the moment tests in this module's test suite check empirically.
//!
//! The [`GeneratorBasis`] type provides the standard Hermitian traceless
//! orthogonal basis of su(m) (generalized Gell-Mann matrices), used both
//! for parameterizing single-qudit gates and for the
//! exponential-of-generators alternative target construction
//! [`random_unitary_exp`].

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Task;
use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, gram_schmidt_unitarize, CMatrix, CVector};
use crate::qcore::{StateVector, SystemDescriptor, UnitaryMatrix};
use crate::rng::{ChaCha8Rng, SeedSequence};

/// The generalized Gell-Mann basis of su(m): m²−1 Hermitian traceless
/// matrices with `Tr(G_i G_j) = 2δ_ij`.
///
/// Ordering: symmetric off-diagonal pairs, then antisymmetric
/// off-diagonal pairs, then the m−1 diagonal generators; each pair family
/// is ordered lexicographically by (row, column). The first m²−m entries
/// are therefore exactly the off-diagonal family used by reduced-mode
/// single-qudit gates.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dimension: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorBasis {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Number of off-diagonal generators (the leading entries): m²−m.
    pub fn offdiagonal_count(&self) -> usize {
        self.dimension * self.dimension - self.dimension
    }

    /// Number of diagonal generators (the trailing entries): m−1.
    pub fn diagonal_count(&self) -> usize {
        self.dimension - 1
    }

    /// The off-diagonal generators only.
    pub fn offdiagonal(&self) -> &[CMatrix] {
        &self.generators[..self.offdiagonal_count()]
    }
}

/// Builds the generalized Gell-Mann basis for dimension `m ≥ 2`.
pub fn gellmann_basis(m: usize) -> Result<GeneratorBasis> {
    if m < 2 {
        return Err(Error::BadQuditDim(m));
    }
    let mut generators = Vec::with_capacity(m * m - 1);
    // symmetric pairs: |j⟩⟨k| + |k⟩⟨j|
    for j in 0..m {
        for k in (j + 1)..m {
            let mut g = CMatrix::zeros(m, m);
            g[(j, k)] = Complex64::new(1.0, 0.0);
            g[(k, j)] = Complex64::new(1.0, 0.0);
            generators.push(g);
        }
    }
    // antisymmetric pairs: −i|j⟩⟨k| + i|k⟩⟨j|
    for j in 0..m {
        for k in (j + 1)..m {
            let mut g = CMatrix::zeros(m, m);
            g[(j, k)] = Complex64::new(0.0, -1.0);
            g[(k, j)] = Complex64::new(0.0, 1.0);
            generators.push(g);
        }
    }
    // diagonal: sqrt(2/(l(l+1))) · diag(1, …, 1, −l, 0, …, 0)
    for l in 1..m {
        let scale = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut g = CMatrix::zeros(m, m);
        for i in 0..l {
            g[(i, i)] = Complex64::new(scale, 0.0);
        }
        g[(l, l)] = Complex64::new(-scale * l as f64, 0.0);
        generators.push(g);
    }
    Ok(GeneratorBasis {
        dimension: m,
        generators,
    })
}

/// Specification of a seeded random target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomTargetSpec {
    pub system: SystemDescriptor,
    pub kind: Task,
    pub seed: u64,
    #[serde(default = "default_randomization_steps")]
    pub randomization_steps: usize,
}

pub const DEFAULT_RANDOMIZATION_STEPS: usize = 1000;

fn default_randomization_steps() -> usize {
    DEFAULT_RANDOMIZATION_STEPS
}

impl RandomTargetSpec {
    pub fn new(system: SystemDescriptor, kind: Task, seed: u64) -> Self {
        Self {
            system,
            kind,
            seed,
            randomization_steps: DEFAULT_RANDOMIZATION_STEPS,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.randomization_steps = steps;
        self
    }
}

fn uniform_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    // real and imaginary parts uniform on [−1, 1]; the randomization
    // steps make the precise range immaterial
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// One raw random unitary: uniform complex fill, then Gram–Schmidt
/// orthonormalization of columns. Not Haar-uniform on its own; the
/// randomization steps take care of that.
fn raw_random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    loop {
        let mut m = CMatrix::from_fn(dim, dim, |_, _| uniform_complex(rng));
        // rank deficiency has probability zero; retry on the measure-zero
        // draw rather than propagate an error nobody can hit
        if gram_schmidt_unitarize(&mut m).is_ok() {
            return m;
        }
    }
}

fn raw_random_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| uniform_complex(rng));
        if v.norm() > 1e-12 {
            return v;
        }
    }
}

/// A seeded random state: uniform fill, normalization, then
/// `randomization_steps` left multiplications by independent random
/// unitaries. Deterministic in the seed.
pub fn random_state(spec: &RandomTargetSpec) -> Result<StateVector> {
    if spec.kind != Task::StatePrep {
        return Err(Error::InvalidArgument(
            "random_state requires a state_prep spec".into(),
        ));
    }
    let seq = SeedSequence::new(spec.seed);
    let dim = spec.system.dim();
    let v = raw_random_vector(dim, &mut seq.stream("target-fill", 0));
    let state = StateVector::new(spec.system, v)?;
    haar_randomize_state(&state, spec.randomization_steps, spec.seed)
}

/// A seeded random unitary: uniform fill, Gram–Schmidt, then
/// `randomization_steps` left multiplications by independent random
/// unitaries. Deterministic in the seed.
pub fn random_unitary(spec: &RandomTargetSpec) -> Result<UnitaryMatrix> {
    if spec.kind != Task::UnitarySynth {
        return Err(Error::InvalidArgument(
            "random_unitary requires a unitary_synth spec".into(),
        ));
    }
    let seq = SeedSequence::new(spec.seed);
    let dim = spec.system.dim();
    let u = raw_random_unitary(dim, &mut seq.stream("target-fill", 0));
    let u = UnitaryMatrix::new(spec.system, u)?;
    haar_randomize_unitary(&u, spec.randomization_steps, spec.seed)
}

/// Convenience: the random target for `spec.kind`, boxed as an enum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    State(StateVector),
    Unitary(UnitaryMatrix),
}

impl Target {
    pub fn system(&self) -> SystemDescriptor {
        match self {
            Target::State(s) => s.system(),
            Target::Unitary(u) => u.system(),
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Target::State(_) => Task::StatePrep,
            Target::Unitary(_) => Task::UnitarySynth,
        }
    }
}

/// Generates the target described by `spec` (state or unitary).
pub fn random_target(spec: &RandomTargetSpec) -> Result<Target> {
    match spec.kind {
        Task::StatePrep => random_state(spec).map(Target::State),
        Task::UnitarySynth => random_unitary(spec).map(Target::Unitary),
    }
}

/// Applies `steps` left multiplications by independently drawn random
/// unitaries to a state. `steps = 0` returns the input unchanged.
pub fn haar_randomize_state(
    state: &StateVector,
    steps: usize,
    seed: u64,
) -> Result<StateVector> {
    let seq = SeedSequence::new(seed);
    let dim = state.system().dim();
    let mut amps = state.amplitudes().clone();
    for step in 0..steps {
        let u = raw_random_unitary(dim, &mut seq.stream("randomize", step as u64));
        amps = &u * amps;
    }
    StateVector::new(state.system(), amps)
}

/// Applies `steps` left multiplications by independently drawn random
/// unitaries to a unitary. `steps = 0` returns the input unchanged.
pub fn haar_randomize_unitary(
    unitary: &UnitaryMatrix,
    steps: usize,
    seed: u64,
) -> Result<UnitaryMatrix> {
    let seq = SeedSequence::new(seed);
    let dim = unitary.system().dim();
    let mut m = unitary.entries().clone();
    for step in 0..steps {
        let u = raw_random_unitary(dim, &mut seq.stream("randomize", step as u64));
        m = &u * m;
    }
    UnitaryMatrix::new(unitary.system(), m)
}

/// The exponential-of-generators construction: `exp(i Σ_j λ_j G_j)` over
/// a basis for the full register dimension. Always unitary; provided as
/// an alternative to [`random_unitary`], not used as the default
/// generator.
pub fn random_unitary_exp(lambdas: &[f64], basis: &GeneratorBasis) -> Result<CMatrix> {
    if lambdas.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: lambdas.len(),
        });
    }
    let dim = basis.dimension();
    let mut h = CMatrix::zeros(dim, dim);
    for (lambda, g) in lambdas.iter().zip(basis.generators()) {
        h += g * Complex64::new(*lambda, 0.0);
    }
    Ok(expm_i_hermitian(&h, 1.0))
}
