// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! Commutator-hierarchy speed estimates.
//!
//! Directions in su(D) that the bare Hamiltonians `{H0, H_j}` do not span
//! are only reachable through nested commutators, and a direction first
//! reached at commutator depth `k` accumulates at a rate suppressed like
//! `(H̄ t)^k`. This module decomposes a target's generator into the
//! orthogonal layers of that hierarchy and turns the per-layer weights
//! into a rough synthesis-time estimate
//! `T ≈ Σ_k ‖ε G^(k)‖^{1/k} / H̄`.
//!
//! The second-order group-commutator identity that underlies the rate
//! argument,
//! `e^{iH_b τ} e^{iH_a τ} e^{−iH_b τ} e^{−iH_a τ} = exp([H_a, H_b] τ²) + O(τ³)`,
//! is exposed directly so the τ³ error scaling can be measured.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    expm_i_hermitian, herm_commutator, hs_inner, hs_norm, log_unitary_with_tol, traceless_part,
    CMatrix,
};
use crate::qcore::UnitaryMatrix;
use crate::rng::SeedSequence;

/// A random traceless Hermitian matrix with unit Hilbert–Schmidt norm.
pub fn random_traceless_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
    });
    let herm = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let t = traceless_part(&herm);
    let norm = hs_norm(&t);
    t / Complex64::new(norm, 0.0)
}

/// Multiplies `U` by `exp(iε G_R)` for a seeded random direction `G_R`
/// (traceless Hermitian, `‖G_R‖_HS = 1`), producing a slightly
/// unreachable neighbor of `U`.
pub fn deform_unitary(u: &UnitaryMatrix, epsilon: f64, seed: u64) -> Result<UnitaryMatrix> {
    if !epsilon.is_finite() {
        return Err(Error::InvalidArgument("deformation ε must be finite".into()));
    }
    let dim = u.system().dim();
    let mut rng = SeedSequence::new(seed).stream("deform", 0);
    let g = random_traceless_hermitian(dim, &mut rng);
    let deformed = expm_i_hermitian(&g, epsilon) * u.entries();
    UnitaryMatrix::new(u.system(), deformed)
}

/// The group commutator `e^{iH_b τ} e^{iH_a τ} e^{−iH_b τ} e^{−iH_a τ}`.
pub fn bch_commutator_sequence(ha: &CMatrix, hb: &CMatrix, tau: f64) -> CMatrix {
    expm_i_hermitian(hb, tau)
        * expm_i_hermitian(ha, tau)
        * expm_i_hermitian(hb, -tau)
        * expm_i_hermitian(ha, -tau)
}

/// The second-order limit of the group commutator:
/// `exp([H_a, H_b] τ²)`, written via the Hermitian bracket
/// `i[H_a, H_b]` as `exp(−i (i[H_a,H_b]) τ²)`.
pub fn bch_reference(ha: &CMatrix, hb: &CMatrix, tau: f64) -> CMatrix {
    expm_i_hermitian(&herm_commutator(ha, hb), -(tau * tau))
}

/// Least-squares slope of `ln ‖sequence − reference‖` against `ln τ`;
/// the group-commutator identity predicts a slope of 3.
pub fn bch_error_slope(ha: &CMatrix, hb: &CMatrix, taus: &[f64]) -> Result<f64> {
    if taus.len() < 2 {
        return Err(Error::InvalidArgument(
            "slope needs at least two τ values".into(),
        ));
    }
    let points: Vec<(f64, f64)> = taus
        .iter()
        .map(|&tau| {
            let err = hs_norm(&(bch_commutator_sequence(ha, hb, tau) - bch_reference(ha, hb, tau)));
            (tau.ln(), err.max(1e-300).ln())
        })
        .collect();
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// One layer of the commutator hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyLayer {
    /// Commutator depth, 1-based; layer 1 is the span of the bare
    /// Hamiltonians themselves.
    pub depth: usize,
    /// Directions this layer added to the reachable subspace.
    pub added: usize,
    /// Hilbert–Schmidt norm of the target generator's component in the
    /// directions new at this depth (`‖ε G^(k)‖`).
    pub norm: f64,
}

/// Orthogonal decomposition of a target generator over the commutator
/// hierarchy of a control model.
#[derive(Debug, Clone)]
pub struct HierarchyDecomposition {
    /// `‖G‖_HS` of the full target generator (the ε in `ε Ĝ`).
    pub epsilon: f64,
    pub layers: Vec<HierarchyLayer>,
    /// Norm of the part of the generator outside the closed algebra.
    pub residual: f64,
    /// Layers until the algebra closed (no new directions appear).
    pub depth: usize,
    /// The layer components `ε G^(k)` as matrices, aligned with
    /// `layers`; they are mutually HS-orthogonal and sum to the
    /// generator up to `residual`.
    pub components: Vec<CMatrix>,
}

fn gs_insert(basis: &mut Vec<CMatrix>, candidate: &CMatrix) -> bool {
    let norm = hs_norm(candidate);
    if norm <= 1e-12 {
        return false;
    }
    let mut v = candidate / Complex64::new(norm, 0.0);
    for b in basis.iter() {
        let overlap = hs_inner(b, &v);
        v -= b * overlap;
    }
    let residual = hs_norm(&v);
    if residual > 1e-9 {
        basis.push(&v / Complex64::new(residual, 0.0));
        true
    } else {
        false
    }
}

/// Decomposes the generator of `target` (via the matrix logarithm, global
/// phase removed) over the nested-commutator layers of `{H0, H_j}`.
pub fn hierarchy_decompose(
    target: &UnitaryMatrix,
    h0: &CMatrix,
    controls: &[CMatrix],
) -> Result<HierarchyDecomposition> {
    let dim = target.system().dim();
    if h0.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h0.nrows(),
        });
    }
    let log = log_unitary_with_tol(target.entries(), 1e-10)?;
    let g = log.generator;
    let epsilon = hs_norm(&g);

    // generator set for brackets
    let mut generators: Vec<CMatrix> = Vec::new();
    for op in std::iter::once(h0).chain(controls.iter()) {
        let t = traceless_part(op);
        if hs_norm(&t) > 1e-12 {
            generators.push(t);
        }
    }
    if generators.is_empty() {
        return Err(Error::InvalidArgument(
            "hierarchy needs at least one nonzero Hamiltonian".into(),
        ));
    }

    // grow the orthonormal basis layer by layer
    let full = dim * dim - 1;
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut layer_ranges: Vec<(usize, usize)> = Vec::new();
    let mut frontier_start = 0usize;
    for gen in &generators {
        gs_insert(&mut basis, gen);
    }
    layer_ranges.push((0, basis.len()));
    while basis.len() < full {
        let frontier_end = basis.len();
        let mut grew = false;
        for idx in frontier_start..frontier_end {
            let x = basis[idx].clone();
            for gen in &generators {
                let c = herm_commutator(&x, gen);
                if gs_insert(&mut basis, &c) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        layer_ranges.push((frontier_end, basis.len()));
        frontier_start = frontier_end;
    }

    // project the generator onto each layer's new directions
    let mut layers = Vec::with_capacity(layer_ranges.len());
    let mut components = Vec::with_capacity(layer_ranges.len());
    let mut recon = CMatrix::zeros(dim, dim);
    for (k, &(lo, hi)) in layer_ranges.iter().enumerate() {
        let mut component = CMatrix::zeros(dim, dim);
        let mut sq = 0.0;
        for b in &basis[lo..hi] {
            let coeff = hs_inner(b, &g);
            sq += coeff.norm_sqr();
            component += b * coeff;
        }
        recon += &component;
        layers.push(HierarchyLayer {
            depth: k + 1,
            added: hi - lo,
            norm: sq.sqrt(),
        });
        components.push(component);
    }
    let residual = hs_norm(&(&g - recon));
    Ok(HierarchyDecomposition {
        epsilon,
        depth: layers.len(),
        layers,
        residual,
        components,
    })
}

/// Default rate scale `H̄`: the Hilbert–Schmidt norm of `H0 + Σ_j H_j`
/// with every control at unit amplitude.
pub fn default_hbar(h0: &CMatrix, controls: &[CMatrix]) -> f64 {
    let mut sum = h0.clone();
    for hj in controls {
        sum += hj;
    }
    hs_norm(&sum)
}

/// The per-layer and total time estimates derived from a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeEstimate {
    /// `T_k = ‖ε G^(k)‖^{1/k} / H̄` per layer.
    pub per_layer: Vec<f64>,
    /// Sum over layers.
    pub total: f64,
    pub hbar: f64,
}

/// Converts layer weights into times: a depth-`k` direction accumulates
/// like `(H̄ t)^k`, so reaching weight `w` costs `w^{1/k} / H̄`.
pub fn time_estimate(decomp: &HierarchyDecomposition, hbar: f64) -> Result<TimeEstimate> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rate scale H̄ must be positive and finite, got {hbar}"
        )));
    }
    let per_layer: Vec<f64> = decomp
        .layers
        .iter()
        .map(|layer| layer.norm.powf(1.0 / layer.depth as f64) / hbar)
        .collect();
    let total = per_layer.iter().sum();
    Ok(TimeEstimate {
        per_layer,
        total,
        hbar,
    })
}

/// Crude bracket on the hierarchy depth for `M` generic generators on
/// `n` qudits of `d` levels: nested commutators up to depth `k` can
/// produce on the order of `M (M+1)^{k−1}` directions, which must cover
/// su(d^n)'s `d^{2n} − 1`, giving the lower bound; adding at least one
/// direction per layer past the generators gives the upper bound.
pub fn k_bounds(n: usize, d: usize, m: usize) -> Result<(u64, u64)> {
    if n == 0 {
        return Err(Error::BadQuditCount(n));
    }
    if d < 2 {
        return Err(Error::BadQuditDim(d));
    }
    if m == 0 {
        return Err(Error::InvalidArgument(
            "generator count must be positive".into(),
        ));
    }
    let dsq: u128 = (d as u128)
        .checked_pow(2 * n as u32)
        .ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap: usize::MAX,
        })?;
    let su_dim = (dsq - 1) as f64;
    let raw = (2.0 * su_dim / m as f64).ln() / ((m + 1) as f64).ln() + 1.0;
    let k_low = (raw - 1e-9).ceil().max(1.0) as u64;
    let k_high = (dsq.saturating_sub(m as u128 + 1)) as u64;
    Ok((k_low, k_high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{build_hamiltonian, HamiltonianModel};
    use crate::linalg::max_abs;
    use crate::qcore::{unitary_fidelity, SystemDescriptor};
    use crate::targets::{random_unitary, RandomTargetSpec};
    use approx::assert_relative_eq;

    fn two_qubit_model() -> (HamiltonianModel, CMatrix, Vec<CMatrix>) {
        let system = SystemDescriptor::new(2, 2).unwrap();
        let model = HamiltonianModel::standard(system);
        let (h0, controls) = build_hamiltonian(&model).unwrap();
        (model, h0, controls)
    }

    #[test]
    fn deformation_generator_is_normalized() {
        let mut rng = SeedSequence::new(5).stream("t", 0);
        let g = random_traceless_hermitian(6, &mut rng);
        assert!(crate::linalg::hermiticity_deviation(&g) < 1e-14);
        let tr: Complex64 = (0..6).map(|i| g[(i, i)]).sum();
        assert!(tr.norm() < 1e-13);
        assert_relative_eq!(hs_norm(&g), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn small_deformation_costs_epsilon_squared_fidelity() {
        let system = SystemDescriptor::new(2, 2).unwrap();
        let spec = RandomTargetSpec::new(system, crate::bounds::Task::UnitarySynth, 9)
            .with_steps(50);
        let u = random_unitary(&spec).unwrap();
        let eps = 1e-3;
        let v = deform_unitary(&u, eps, 21).unwrap();
        let infid = 1.0 - unitary_fidelity(&u, &v).unwrap();
        // F ≈ 1 − ε²‖G‖²/D for traceless unit-norm G
        let predicted = eps * eps / system.dim() as f64;
        assert_relative_eq!(infid, predicted, max_relative = 1e-2);
        // ε = 0 leaves the unitary unchanged
        let same = deform_unitary(&u, 0.0, 21).unwrap();
        assert!(max_abs(&(same.entries() - u.entries())) < 1e-12);
    }

    #[test]
    fn bch_error_shrinks_cubically() {
        let mut rng = SeedSequence::new(11).stream("bch", 0);
        let ha = random_traceless_hermitian(4, &mut rng);
        let hb = random_traceless_hermitian(4, &mut rng);
        let taus = [0.1, 0.05, 0.025, 0.0125];
        for &tau in &taus {
            let err = hs_norm(&(bch_commutator_sequence(&ha, &hb, tau) - bch_reference(&ha, &hb, tau)));
            assert!(err < 10.0 * tau.powi(3), "τ={tau}: err {err}");
        }
        let slope = bch_error_slope(&ha, &hb, &taus).unwrap();
        assert!((slope - 3.0).abs() <= 0.2, "slope {slope}");
    }

    #[test]
    fn bch_identity_for_commuting_terms() {
        let za = CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let seq = bch_commutator_sequence(&za, &za, 0.3);
        assert!(max_abs(&(seq - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn hierarchy_depth_of_standard_two_qubit_model() {
        let (_, h0, controls) = two_qubit_model();
        let u = UnitaryMatrix::identity(SystemDescriptor::new(2, 2).unwrap());
        let deformed = deform_unitary(&u, 1e-2, 3).unwrap();
        let decomp = hierarchy_decompose(&deformed, &h0, &controls).unwrap();
        // layers: {XX, X1, Y1, X2, Y2} → +{Z} → +{ZX-type} → ... closing at su(4)
        assert_eq!(decomp.depth, 5);
        let total_dims: usize = decomp.layers.iter().map(|l| l.added).sum();
        assert_eq!(total_dims, 15);
        assert!(decomp.residual <= 1e-9 * decomp.epsilon);
    }

    #[test]
    fn hierarchy_components_are_orthogonal_and_complete() {
        let (_, h0, controls) = two_qubit_model();
        let system = SystemDescriptor::new(2, 2).unwrap();
        for seed in 0..5u64 {
            let spec = RandomTargetSpec::new(system, crate::bounds::Task::UnitarySynth, seed)
                .with_steps(50);
            let u = deform_unitary(&random_unitary(&spec).unwrap(), 1e-3, seed + 100).unwrap();
            let decomp = hierarchy_decompose(&u, &h0, &controls).unwrap();
            for i in 0..decomp.components.len() {
                for j in (i + 1)..decomp.components.len() {
                    let ov = hs_inner(&decomp.components[i], &decomp.components[j]).norm();
                    assert!(ov <= 1e-9, "layers {i},{j} overlap {ov}");
                }
            }
            let sq: f64 = decomp.layers.iter().map(|l| l.norm * l.norm).sum();
            assert_relative_eq!(sq.sqrt(), decomp.epsilon, epsilon = 1e-8);
            assert!(decomp.residual <= 1e-9 * decomp.epsilon);
        }
    }

    #[test]
    fn hierarchy_scales_linearly_for_identity_deformations() {
        let (_, h0, controls) = two_qubit_model();
        let u = UnitaryMatrix::identity(SystemDescriptor::new(2, 2).unwrap());
        let eps = 1e-3;
        let d1 = hierarchy_decompose(&deform_unitary(&u, eps, 7).unwrap(), &h0, &controls).unwrap();
        let d2 =
            hierarchy_decompose(&deform_unitary(&u, 2.0 * eps, 7).unwrap(), &h0, &controls)
                .unwrap();
        assert_relative_eq!(d2.epsilon, 2.0 * d1.epsilon, max_relative = 1e-9);
        for (a, b) in d1.layers.iter().zip(&d2.layers) {
            if a.norm > 1e-12 {
                assert_relative_eq!(b.norm, 2.0 * a.norm, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn deeper_layers_cost_more_time_at_small_epsilon() {
        let (_, h0, controls) = two_qubit_model();
        let u = UnitaryMatrix::identity(SystemDescriptor::new(2, 2).unwrap());
        let deformed = deform_unitary(&u, 1e-4, 13).unwrap();
        let decomp = hierarchy_decompose(&deformed, &h0, &controls).unwrap();
        let hbar = default_hbar(&h0, &controls);
        let est = time_estimate(&decomp, hbar).unwrap();
        assert_eq!(est.per_layer.len(), decomp.layers.len());
        assert_relative_eq!(est.total, est.per_layer.iter().sum::<f64>());
        // w^{1/k} for tiny w grows with k: deep layers dominate the cost
        let (mut seen_nonzero, mut last) = (false, 0.0);
        for (layer, &t) in decomp.layers.iter().zip(&est.per_layer) {
            if layer.norm > 1e-12 {
                if seen_nonzero {
                    assert!(t >= last, "layer {} estimate fell", layer.depth);
                }
                seen_nonzero = true;
                last = t;
            }
        }
        assert!(time_estimate(&decomp, 0.0).is_err());
    }

    #[test]
    fn k_bounds_examples() {
        assert_eq!(k_bounds(2, 2, 5).unwrap(), (2, 10));
        let (_, high) = k_bounds(1, 2, 2).unwrap();
        assert_eq!(high, 1);
        assert!(k_bounds(0, 2, 5).is_err());
        assert!(k_bounds(2, 1, 5).is_err());
        assert!(k_bounds(2, 2, 0).is_err());
        // more generators never increase the lower bound
        let (low_small, _) = k_bounds(2, 3, 4).unwrap();
        let (low_large, _) = k_bounds(2, 3, 40).unwrap();
        assert!(low_large <= low_small);
    }
}
