// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra shared by every module: Hermitian
//! eigendecompositions, unitary exponentials and their directional
//! derivatives, Gram-Schmidt unitarization, and the principal logarithm
//! of a unitary matrix.
//!
//! All matrices are dense `nalgebra` matrices over `Complex64`; register
//! dimensions stay small (at most a few hundred) so dense is the right
//! representation throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entry magnitude of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Max-entry deviation of `U†U` from the identity.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    max_abs(&(prod - CMatrix::identity(n, n)))
}

/// Max-entry deviation of `H` from `H†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hilbert-Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Hilbert-Schmidt norm `sqrt(Tr(A†A))`.
pub fn hs_norm(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the trace component: `A - (Tr A / D) I`.
pub fn traceless_part(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mean = a.trace() / (n as f64);
    let mut out = a.clone();
    for k in 0..n {
        out[(k, k)] -= mean;
    }
    out
}

/// `i[A, B]`; Hermitian whenever `A` and `B` are Hermitian.
pub fn herm_commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    (a * b - b * a) * I
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending)
/// and unitary eigenvector matrix `V` with `H = V diag(λ) V†`.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> HermitianEigen {
    let se = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// `exp(i t H)` for Hermitian `H`, via eigendecomposition; always unitary
/// to machine precision.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = hermitian_eigen(h);
    exp_from_eigen(&eig, t)
}

/// Rebuilds `exp(i t H)` from a precomputed eigendecomposition.
pub fn exp_from_eigen(eig: &HermitianEigen, t: f64) -> CMatrix {
    let n = eig.values.len();
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, t * eig.values[k]);
        scaled.column_mut(k).iter_mut().for_each(|x| *x *= phase);
    }
    scaled * v.adjoint()
}

/// Directional derivative of `θ ↦ exp(i t H(θ))` at `H` in direction `E`,
/// i.e. the Fréchet derivative of the matrix exponential evaluated via the
/// divided-difference (Loewner) formula on the eigenbasis of `H`.
///
/// With `H = V Λ V†` and `f(λ) = e^{itλ}`, the derivative is
/// `V (Φ ∘ (V† E V)) V†` where `Φ_jk = (f(λ_j) - f(λ_k)) / (λ_j - λ_k)`
/// and `Φ_jj = i t f(λ_j)`.
pub fn exp_frechet(eig: &HermitianEigen, t: f64, direction: &CMatrix) -> CMatrix {
    let n = eig.values.len();
    let v = &eig.vectors;
    let mut inner = v.adjoint() * direction * v;
    for j in 0..n {
        for k in 0..n {
            let lj = eig.values[j];
            let lk = eig.values[k];
            let fj = Complex64::from_polar(1.0, t * lj);
            let phi = if (lj - lk).abs() > 1e-12 * (1.0 + lj.abs().max(lk.abs())) {
                let fk = Complex64::from_polar(1.0, t * lk);
                (fj - fk) / Complex64::new(lj - lk, 0.0)
            } else {
                I * t * fj
            };
            inner[(j, k)] *= phi;
        }
    }
    v * inner * v.adjoint()
}

/// Orthonormalizes the columns in place (modified Gram-Schmidt with a
/// second re-orthogonalization pass). Fails on rank-deficient input.
pub fn gram_schmidt_unitarize(m: &mut CMatrix) -> Result<()> {
    let n = m.nrows();
    for j in 0..n {
        // two passes keep the loss of orthogonality at machine precision
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = m.column(k).iter().zip(m.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
                let prev = m.column(k).into_owned();
                m.column_mut(j).iter_mut().zip(prev.iter()).for_each(|(x, p)| *x -= proj * p);
            }
        }
        let norm = m.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument(
                "rank-deficient matrix in Gram-Schmidt unitarization".into(),
            ));
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        m.column_mut(j).iter_mut().for_each(|x| *x *= inv);
    }
    Ok(())
}

/// Eigendecomposition of a unitary matrix `U = V diag(e^{iθ}) V†`.
///
/// A unitary is normal, so it shares eigenvectors with the Hermitian
/// matrices `(U + U†)/2` and `(U - U†)/(2i)`. A generic real combination
/// of the two has a simple spectrum whenever `U` does, which lets the
/// Hermitian eigensolver do the work. Combination angles are retried from
/// a fixed sequence until the off-diagonal residue of `V†UV` is small, so
/// the result is deterministic.
pub struct UnitaryEigen {
    /// Eigenphases `θ_j` with `e^{iθ_j}` the eigenvalues, in `(-π, π]`.
    pub phases: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn unitary_eigen(u: &CMatrix) -> Result<UnitaryEigen> {
    let n = u.nrows();
    let re = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let im = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    // golden-angle sequence; any fixed irrational stride works
    const GOLDEN: f64 = 2.399963229728653;
    for attempt in 0..12 {
        let t = 0.7 + GOLDEN * attempt as f64;
        let combo = &re * Complex64::new(t.cos(), 0.0) + &im * Complex64::new(t.sin(), 0.0);
        let eig = hermitian_eigen(&combo);
        let v = &eig.vectors;
        let d = v.adjoint() * u * v;
        let mut offdiag: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    offdiag = offdiag.max(d[(j, k)].norm());
                }
            }
        }
        if offdiag <= 1e-9 {
            let phases: Vec<f64> = (0..n).map(|k| d[(k, k)].arg()).collect();
            return Ok(UnitaryEigen {
                phases,
                vectors: eig.vectors,
            });
        }
    }
    Err(Error::UnitaryEigenFailed)
}

/// Principal logarithm of a unitary, split into a traceless Hermitian
/// generator and a global phase: `U = e^{iφ} exp(i G)` with `Tr G = 0`.
///
/// Eigenphases are taken in `(-π, π]`. When an eigenphase sits within
/// `branch_tol` of the cut at ±π, the whole spectrum is rotated by a
/// recorded global phase that moves the cut into the largest spectral gap
/// before taking the logarithm.
pub struct UnitaryLog {
    pub generator: CMatrix,
    pub global_phase: f64,
    /// Phase rotation applied to dodge the branch cut; zero when not needed.
    pub branch_shift: f64,
}

pub fn log_unitary(u: &CMatrix) -> Result<UnitaryLog> {
    log_unitary_with_tol(u, 1e-6)
}

pub fn log_unitary_with_tol(u: &CMatrix, branch_tol: f64) -> Result<UnitaryLog> {
    let eig = unitary_eigen(u)?;
    let n = eig.phases.len();

    // distance of each phase to the cut at ±π
    let near_cut = eig
        .phases
        .iter()
        .any(|&p| (std::f64::consts::PI - p.abs()) < branch_tol);

    let mut shift = 0.0;
    if near_cut {
        // place the cut in the middle of the largest gap of the sorted phases
        let mut sorted = eig.phases.clone();
        sorted.sort_by(f64::total_cmp);
        let mut best_gap = 0.0;
        let mut cut_at = std::f64::consts::PI;
        for j in 0..n {
            let a = sorted[j];
            let b = if j + 1 < n {
                sorted[j + 1]
            } else {
                sorted[0] + std::f64::consts::TAU
            };
            if b - a > best_gap {
                best_gap = b - a;
                cut_at = 0.5 * (a + b);
            }
        }
        // rotate so the new cut lands on ±π
        shift = cut_at - std::f64::consts::PI;
    }

    let mut phases: Vec<f64> = eig
        .phases
        .iter()
        .map(|&p| {
            let mut q = p - shift;
            while q > std::f64::consts::PI {
                q -= std::f64::consts::TAU;
            }
            while q <= -std::f64::consts::PI {
                q += std::f64::consts::TAU;
            }
            q
        })
        .collect();

    let mean: f64 = phases.iter().sum::<f64>() / n as f64;
    phases.iter_mut().for_each(|p| *p -= mean);

    let v = &eig.vectors;
    let mut scaled = v.clone();
    for k in 0..n {
        let lk = Complex64::new(phases[k], 0.0);
        scaled.column_mut(k).iter_mut().for_each(|x| *x *= lk);
    }
    let generator = &scaled * v.adjoint();
    // enforce exact Hermiticity against roundoff
    let generator = (&generator + generator.adjoint()) * Complex64::new(0.5, 0.0);

    Ok(UnitaryLog {
        generator,
        global_phase: mean + shift,
        branch_shift: shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = random_matrix(n, rng);
        (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut m = random_matrix(n, rng);
        gram_schmidt_unitarize(&mut m).unwrap();
        m
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 5, 9, 16] {
            let h = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&h);
            let mut rec = CMatrix::zeros(n, n);
            for k in 0..n {
                let col = eig.vectors.column(k).into_owned();
                rec += &col * col.adjoint() * Complex64::new(eig.values[k], 0.0);
            }
            assert!(max_abs(&(rec - h)) < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn expm_is_unitary_and_matches_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(6, &mut rng);
        let u = expm_i_hermitian(&h, 0.01);
        assert!(unitarity_deviation(&u) < 1e-13);
        // compare against a truncated Taylor series at small t
        let mut series = CMatrix::identity(6, 6);
        let mut term = CMatrix::identity(6, 6);
        for k in 1..=12 {
            term = (&term * &h) * (I * 0.01 / k as f64);
            series += &term;
        }
        assert!(max_abs(&(u - series)) < 1e-14);
    }

    #[test]
    fn frechet_derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let e = random_hermitian(5, &mut rng);
        let t = 0.37;
        let eig = hermitian_eigen(&h);
        let analytic = exp_frechet(&eig, t, &e);
        let step = 1e-6;
        let plus = expm_i_hermitian(&(&h + &e * Complex64::new(step, 0.0)), t);
        let minus = expm_i_hermitian(&(&h - &e * Complex64::new(step, 0.0)), t);
        let fd = (plus - minus) * Complex64::new(0.5 / step, 0.0);
        assert!(max_abs(&(analytic - fd)) < 1e-8);
    }

    #[test]
    fn gram_schmidt_produces_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2, 7, 16] {
            let u = random_unitary(n, &mut rng);
            assert!(unitarity_deviation(&u) < 1e-13);
        }
    }

    #[test]
    fn log_roundtrips_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 4, 9] {
            let u = random_unitary(n, &mut rng);
            let lg = log_unitary(&u).unwrap();
            assert!(lg.generator.trace().norm() < 1e-10);
            assert!(hermiticity_deviation(&lg.generator) < 1e-12);
            let rec = expm_i_hermitian(&lg.generator, 1.0)
                * Complex64::from_polar(1.0, lg.global_phase);
            assert!(max_abs(&(rec - u)) < 1e-9);
        }
    }

    #[test]
    fn log_handles_eigenphase_at_cut() {
        // diag(1, -1) has an eigenphase exactly at π
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        let lg = log_unitary(&u).unwrap();
        assert!(lg.branch_shift != 0.0);
        let rec =
            expm_i_hermitian(&lg.generator, 1.0) * Complex64::from_polar(1.0, lg.global_phase);
        assert!(max_abs(&(rec - u)) < 1e-10);
    }

    #[test]
    fn unitary_eigen_handles_degenerate_spectra() {
        // CZ-like diagonal with repeated entries
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, ONE, -ONE]));
        let eig = unitary_eigen(&u).unwrap();
        let mut phases = eig.phases.clone();
        phases.sort_by(f64::total_cmp);
        assert!(phases[0].abs() < 1e-12);
        assert!((phases[3] - std::f64::consts::PI).abs() < 1e-12);
    }
}
