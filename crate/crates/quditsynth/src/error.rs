// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by construction and validation of domain values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qudit count must be at least 1, got {0}")]
    BadQuditCount(usize),

    #[error("qudit dimension must be at least 2, got {0}")]
    BadQuditDim(usize),

    #[error("register dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("qudit index {index} out of range for {n} qudits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e} > {tolerance:.3e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("state vector has near-zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("eigendecomposition of unitary did not converge")]
    UnitaryEigenFailed,
}

pub type Result<T> = std::result::Result<T, Error>;
