// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Foundational value types for multi-qudit registers: system descriptors,
//! normalized state vectors, unitary matrices, tensor embedding of two-qudit
//! gates, and global-phase-invariant fidelity measures.
//!
//! # Basis ordering
//!
//! Composite basis indices use the big-endian digit convention: qudit 0 is
//! the most significant digit. For `n` qudits of dimension `d`, basis index
//! `i` decomposes as `i = Σ_k x_k d^(n-1-k)` with `x_k` the level of qudit
//! `k`. This convention is fixed so serialized matrices are comparable
//! across runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, unitarity_deviation, CMatrix, CVector};

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Unitarity tolerance (max-entry deviation of `U†U` from identity).
pub const UNITARITY_TOL: f64 = 1e-10;

/// A register of `n` qudits with `d` levels each; the Hilbert-space
/// dimension `D = d^n` is derived and capped at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemDescriptor {
    n: usize,
    d: usize,
    #[serde(rename = "dim")]
    dim: usize,
}

impl SystemDescriptor {
    /// Default cap on the register dimension.
    pub const DIM_CAP: usize = 1 << 20;

    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_cap(n, d, Self::DIM_CAP)
    }

    pub fn with_cap(n: usize, d: usize, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::BadQuditCount(n));
        }
        if d < 2 {
            return Err(Error::BadQuditDim(d));
        }
        let mut dim: usize = 1;
        for _ in 0..n {
            dim = dim
                .checked_mul(d)
                .filter(|&x| x <= cap)
                .ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
        }
        Ok(Self { n, d, dim })
    }

    pub fn qudits(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.d
    }

    /// Register dimension `D = d^n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Digits of a basis index, most significant (qudit 0) first.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.dim);
        let mut out = vec![0; self.n];
        let mut rem = index;
        for k in (0..self.n).rev() {
            out[k] = rem % self.d;
            rem /= self.d;
        }
        out
    }

    /// Inverse of [`digits`](Self::digits).
    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.n);
        digits.iter().fold(0, |acc, &x| acc * self.d + x)
    }
}

impl<'de> Deserialize<'de> for SystemDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            d: usize,
        }
        let raw = Raw::deserialize(de)?;
        SystemDescriptor::new(raw.n, raw.d).map_err(serde::de::Error::custom)
    }
}

/// A normalized pure state of an `n`-qudit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    system: SystemDescriptor,
    amplitudes: CVector,
}

impl StateVector {
    /// Normalizes the amplitudes; fails on near-zero norm or wrong length.
    /// Amplitudes already normalized to within [`NORM_TOL`] are kept
    /// verbatim so that serialization round-trips are bit-exact.
    pub fn new(system: SystemDescriptor, mut amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroNorm);
        }
        if (norm - 1.0).abs() > NORM_TOL {
            amplitudes /= Complex64::new(norm, 0.0);
        }
        Ok(Self { system, amplitudes })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis_state(system: SystemDescriptor, index: usize) -> Result<Self> {
        if index >= system.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                n: system.dim(),
            });
        }
        let mut amplitudes = CVector::zeros(system.dim());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { system, amplitudes })
    }

    /// The all-zeros state `|0…0⟩`.
    pub fn ground(system: SystemDescriptor) -> Self {
        Self::basis_state(system, 0).expect("index 0 always in range")
    }

    pub fn system(&self) -> SystemDescriptor {
        self.system
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// A unitary operator on an `n`-qudit register, validated to
/// [`UNITARITY_TOL`] at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    system: SystemDescriptor,
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(system: SystemDescriptor, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != system.dim() || entries.ncols() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                got: entries.nrows(),
            });
        }
        let deviation = unitarity_deviation(&entries);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: UNITARITY_TOL,
            });
        }
        Ok(Self { system, entries })
    }

    pub fn identity(system: SystemDescriptor) -> Self {
        Self {
            system,
            entries: CMatrix::identity(system.dim(), system.dim()),
        }
    }

    pub fn system(&self) -> SystemDescriptor {
        self.system
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Applies this operator to a state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.system() != self.system {
            return Err(Error::DimensionMismatch {
                expected: self.system.dim(),
                got: state.system().dim(),
            });
        }
        StateVector::new(self.system, &self.entries * state.amplitudes())
    }
}

/// Embeds a single-qudit gate acting on qudit `target` into the full
/// register.
pub fn embed_single_qudit(
    gate: &CMatrix,
    target: usize,
    system: SystemDescriptor,
) -> Result<UnitaryMatrix> {
    let d = system.levels();
    let n = system.qudits();
    if target >= n {
        return Err(Error::IndexOutOfRange { index: target, n });
    }
    if gate.nrows() != d || gate.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: gate.nrows(),
        });
    }
    let deviation = unitarity_deviation(gate);
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: UNITARITY_TOL,
        });
    }
    let dim = system.dim();
    let stride = d.pow((n - 1 - target) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    // loop over basis states grouped by the digits of all other qudits
    for base in 0..dim {
        let digit = (base / stride) % d;
        if digit != 0 {
            continue;
        }
        for row in 0..d {
            for col in 0..d {
                out[(base + row * stride, base + col * stride)] = gate[(row, col)];
            }
        }
    }
    Ok(UnitaryMatrix {
        system,
        entries: out,
    })
}

/// Embeds a two-qudit gate acting on the ordered pair `(a, b)` into the
/// full register; the gate's basis is `|k,l⟩` with `k` the level of qudit
/// `a` and `l` the level of qudit `b`.
pub fn embed_two_qudit(
    gate: &CMatrix,
    pair: (usize, usize),
    system: SystemDescriptor,
) -> Result<UnitaryMatrix> {
    let (a, b) = pair;
    let d = system.levels();
    let n = system.qudits();
    if a >= n {
        return Err(Error::IndexOutOfRange { index: a, n });
    }
    if b >= n {
        return Err(Error::IndexOutOfRange { index: b, n });
    }
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "two-qudit gate needs distinct qudits, got ({a}, {b})"
        )));
    }
    let dd = d * d;
    if gate.nrows() != dd || gate.ncols() != dd {
        return Err(Error::DimensionMismatch {
            expected: dd,
            got: gate.nrows(),
        });
    }
    let deviation = unitarity_deviation(gate);
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tolerance: UNITARITY_TOL,
        });
    }
    let dim = system.dim();
    let stride_a = d.pow((n - 1 - a) as u32);
    let stride_b = d.pow((n - 1 - b) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for base in 0..dim {
        if (base / stride_a) % d != 0 || (base / stride_b) % d != 0 {
            continue;
        }
        for ka in 0..d {
            for la in 0..d {
                let row = base + ka * stride_a + la * stride_b;
                for kb in 0..d {
                    for lb in 0..d {
                        let col = base + kb * stride_a + lb * stride_b;
                        out[(row, col)] = gate[(ka * d + la, kb * d + lb)];
                    }
                }
            }
        }
    }
    Ok(UnitaryMatrix {
        system,
        entries: out,
    })
}

/// Overlap fidelity `|⟨a|b⟩|²`; 1 exactly when the states agree up to a
/// global phase.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.system() != b.system() {
        return Err(Error::DimensionMismatch {
            expected: a.system().dim(),
            got: b.system().dim(),
        });
    }
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}

/// Global-phase-invariant operator fidelity `|Tr(U†V)|² / D²`.
pub fn unitary_fidelity(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.system() != v.system() {
        return Err(Error::DimensionMismatch {
            expected: u.system().dim(),
            got: v.system().dim(),
        });
    }
    Ok(unitary_fidelity_raw(u.entries(), v.entries()))
}

/// Fidelity on raw matrices; callers must ensure matching dimensions.
pub(crate) fn unitary_fidelity_raw(u: &CMatrix, v: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
    tr.norm_sqr() / (d * d)
}

// --- serialization: amplitudes and entries as [re, im] pairs, row-major ---

#[derive(Serialize, Deserialize)]
struct StateWire {
    system: SystemDescriptor,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        StateWire {
            system: self.system,
            amplitudes: self.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = StateWire::deserialize(de)?;
        let amps = CVector::from_iterator(
            wire.amplitudes.len(),
            wire.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)),
        );
        StateVector::new(wire.system, amps).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct UnitaryWire {
    system: SystemDescriptor,
    /// Row-major rows of `[re, im]` pairs.
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.system.dim();
        let entries = (0..dim)
            .map(|r| (0..dim).map(|c| {
                let z = self.entries[(r, c)];
                [z.re, z.im]
            }).collect())
            .collect();
        UnitaryWire {
            system: self.system,
            entries,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = UnitaryWire::deserialize(de)?;
        let dim = wire.system.dim();
        if wire.entries.len() != dim || wire.entries.iter().any(|row| row.len() != dim) {
            return Err(serde::de::Error::custom("unitary entries have wrong shape"));
        }
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            let [re, im] = wire.entries[r][c];
            Complex64::new(re, im)
        });
        UnitaryMatrix::new(wire.system, m).map_err(serde::de::Error::custom)
    }
}

/// Max-entry distance between two unitaries, ignoring system bookkeeping.
pub fn max_entry_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> f64 {
    max_abs(&(u.entries() - v.entries()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i_hermitian, ONE, ZERO};
    use approx::assert_relative_eq;

    fn two_qubits() -> SystemDescriptor {
        SystemDescriptor::new(2, 2).unwrap()
    }

    fn cz2() -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, ONE, -ONE]))
    }

    #[test]
    fn descriptor_validates_and_derives_dim() {
        let sys = SystemDescriptor::new(3, 4).unwrap();
        assert_eq!(sys.dim(), 64);
        assert!(SystemDescriptor::new(0, 2).is_err());
        assert!(SystemDescriptor::new(2, 1).is_err());
        assert!(SystemDescriptor::with_cap(2, 2, 3).is_err());
        assert!(SystemDescriptor::new(30, 4).is_err());
    }

    #[test]
    fn digit_convention_is_big_endian() {
        let sys = SystemDescriptor::new(3, 2).unwrap();
        assert_eq!(sys.digits(5), vec![1, 0, 1]);
        assert_eq!(sys.index(&[1, 0, 1]), 5);
        let sys = SystemDescriptor::new(2, 3).unwrap();
        assert_eq!(sys.digits(5), vec![1, 2]);
    }

    #[test]
    fn states_are_normalized() {
        let sys = two_qubits();
        let raw = CVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 4.0),
            ZERO,
            ZERO,
        ]);
        let psi = StateVector::new(sys, raw).unwrap();
        assert_relative_eq!(psi.norm(), 1.0, epsilon = NORM_TOL);
        assert!(StateVector::new(sys, CVector::zeros(4)).is_err());
    }

    #[test]
    fn unitary_constructor_rejects_non_unitary() {
        let sys = two_qubits();
        let mut m = CMatrix::identity(4, 4);
        m[(0, 0)] = Complex64::new(1.1, 0.0);
        assert!(matches!(
            UnitaryMatrix::new(sys, m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn embed_identity_is_identity() {
        let sys = two_qubits();
        let id4 = CMatrix::identity(4, 4);
        let u = embed_two_qudit(&id4, (0, 1), sys).unwrap();
        assert_eq!(u.entries(), UnitaryMatrix::identity(sys).entries());
    }

    #[test]
    fn embed_cz_on_adjacent_pair() {
        let sys = two_qubits();
        let u = embed_two_qudit(&cz2(), (0, 1), sys).unwrap();
        assert_eq!(u.entries(), &cz2());
    }

    #[test]
    fn embed_cz_on_distant_pair() {
        // three qubits, CZ on (0, 2): -1 exactly at indices 5 and 7
        let sys = SystemDescriptor::new(3, 2).unwrap();
        let u = embed_two_qudit(&cz2(), (0, 2), sys).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i != j {
                    ZERO
                } else if i == 5 || i == 7 {
                    -ONE
                } else {
                    ONE
                };
                assert_eq!(u.entries()[(i, j)], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn embed_respects_qudit_order() {
        // asymmetric gate: check (a, b) vs (b, a) transpose relation on digits
        let sys = SystemDescriptor::new(2, 2).unwrap();
        // SWAP-free marker gate: |k,l> -> phase by k only
        let mut g = CMatrix::zeros(4, 4);
        g[(0, 0)] = ONE;
        g[(1, 1)] = ONE;
        g[(2, 2)] = Complex64::new(0.0, 1.0);
        g[(3, 3)] = Complex64::new(0.0, 1.0);
        let u01 = embed_two_qudit(&g, (0, 1), sys).unwrap();
        let u10 = embed_two_qudit(&g, (1, 0), sys).unwrap();
        // on (0,1): phase i when qudit 0 is |1> (indices 2, 3)
        assert_eq!(u01.entries()[(2, 2)], Complex64::new(0.0, 1.0));
        assert_eq!(u01.entries()[(1, 1)], ONE);
        // on (1,0): phase i when qudit 1 is |1> (indices 1, 3)
        assert_eq!(u10.entries()[(1, 1)], Complex64::new(0.0, 1.0));
        assert_eq!(u10.entries()[(2, 2)], ONE);
    }

    #[test]
    fn embed_rejects_bad_input() {
        let sys = two_qubits();
        assert!(embed_two_qudit(&cz2(), (0, 0), sys).is_err());
        assert!(embed_two_qudit(&cz2(), (0, 2), sys).is_err());
        let mut bad = cz2();
        bad[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!(embed_two_qudit(&bad, (0, 1), sys).is_err());
    }

    #[test]
    fn state_fidelity_basics() {
        let sys = SystemDescriptor::new(1, 2).unwrap();
        let zero = StateVector::basis_state(sys, 0).unwrap();
        let one = StateVector::basis_state(sys, 1).unwrap();
        let plus = StateVector::new(sys, CVector::from_vec(vec![ONE, ONE])).unwrap();
        assert_relative_eq!(state_fidelity(&zero, &zero).unwrap(), 1.0);
        assert_relative_eq!(state_fidelity(&zero, &one).unwrap(), 0.0);
        assert_relative_eq!(state_fidelity(&zero, &plus).unwrap(), 0.5, epsilon = 1e-12);
        let other = SystemDescriptor::new(2, 2).unwrap();
        assert!(state_fidelity(&zero, &StateVector::ground(other)).is_err());
    }

    #[test]
    fn unitary_fidelity_basics() {
        let sys = SystemDescriptor::new(1, 2).unwrap();
        let id = UnitaryMatrix::identity(sys);
        let z = UnitaryMatrix::new(
            sys,
            CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE])),
        )
        .unwrap();
        assert_relative_eq!(unitary_fidelity(&id, &id).unwrap(), 1.0);
        assert_relative_eq!(unitary_fidelity(&id, &z).unwrap(), 0.0);
        // global phase invariance
        let phase = Complex64::from_polar(1.0, std::f64::consts::PI / 7.0);
        let zp = UnitaryMatrix::new(sys, z.entries() * phase).unwrap();
        assert_relative_eq!(unitary_fidelity(&z, &zp).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn embedded_disjoint_gates_commute() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3] {
            let sys = SystemDescriptor::new(4, d).unwrap();
            let dd = d * d;
            let g1 = {
                let h = crate::linalg::CMatrix::from_fn(dd, dd, |_, _| {
                    use rand::Rng;
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                expm_i_hermitian(&((&h + h.adjoint()) * Complex64::new(0.5, 0.0)), 1.0)
            };
            let g2 = {
                let h = crate::linalg::CMatrix::from_fn(dd, dd, |_, _| {
                    use rand::Rng;
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                expm_i_hermitian(&((&h + h.adjoint()) * Complex64::new(0.5, 0.0)), 1.0)
            };
            let u = embed_two_qudit(&g1, (0, 2), sys).unwrap();
            let v = embed_two_qudit(&g2, (1, 3), sys).unwrap();
            let uv = u.entries() * v.entries();
            let vu = v.entries() * u.entries();
            assert!(max_abs(&(uv - vu)) < 1e-10);
        }
    }

    #[test]
    fn wire_format_roundtrip() {
        let sys = two_qubits();
        let u = embed_two_qudit(&cz2(), (0, 1), sys).unwrap();
        let json = serde_json::to_string(&u).unwrap();
        let back: UnitaryMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(max_entry_distance(&u, &back), 0.0);

        let psi = StateVector::new(
            sys,
            CVector::from_vec(vec![ONE, Complex64::new(0.0, 2.0), ZERO, -ONE]),
        )
        .unwrap();
        let json = serde_json::to_string(&psi).unwrap();
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(psi, back);
    }
}
