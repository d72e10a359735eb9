//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, protocol pipelines, and the
/// feasibility calculator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ion count mismatch: state declares {expected} ions, got {found}")]
    IonCountMismatch { expected: usize, found: usize },

    #[error("ion index {index} out of range for {ion_count} ions")]
    IonIndexOutOfRange { index: usize, ion_count: usize },

    #[error("subsystem factors must partition the ion register exactly (ion {index} {problem})")]
    FactorCoverage { index: usize, problem: &'static str },

    #[error("factor is not normalized: squared norm {norm_sq} differs from 1 by more than {tol}")]
    FactorNotNormalized { norm_sq: f64, tol: f64 },

    #[error("input pair is not normalized: squared norm {norm_sq} (pass a normalization override to rescale)")]
    InputNotNormalized { norm_sq: f64 },

    #[error("zero-norm state where a nonzero state is required")]
    ZeroNormState,

    #[error("basis term already carries an interferometer photon; single-photon sector only")]
    PhotonAlreadyPresent,

    #[error("ion {index} lies outside the metastable qubit subspace on a populated term")]
    IonNotMetastable { index: usize },

    #[error("measurement basis is not normalized: |nu|^2 + |mu|^2 = {norm_sq}")]
    BasisNotNormalized { norm_sq: f64 },

    #[error("parameter {name} must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("parameter {name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("undefined result: {0}")]
    DegenerateInput(String),

    #[error("sweep configuration error: {0}")]
    Config(String),

    #[error("internal consistency failure: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
