use thiserror::Error;

/// Errors raised by state construction, transforms and metrics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("covariance matrix must be square with even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max |M - M^T| = {residual:e})")]
    Asymmetric { residual: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("mode permutation is not a bijection on {n_modes} modes")]
    InvalidPermutation { n_modes: usize },

    #[error("dimension mismatch: transform expects {expected} columns, state has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {mode} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("expected a two-mode state, got {n_modes} modes")]
    NotTwoMode { n_modes: usize },

    #[error("eigenvalues of i*Omega*sigma do not pair: {a} vs {b}")]
    UnpairedSpectrum { a: f64, b: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenSolverFailed,

    #[error("symplectic spectrum routes disagree by {difference:e}")]
    SpectrumRouteMismatch { difference: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("negative radicand {value:e} in closed-form symplectic eigenvalue")]
    NegativeRadicand { value: f64 },

    #[error("fidelity undefined: {reason} ({value:e})")]
    FidelityDomain { reason: &'static str, value: f64 },

    #[error("output decomposition requires the gain-corrected convention")]
    ConventionMismatch,

    #[error("output does not decompose as sigma' + noise*I (residual {residual:e})")]
    DecompositionMismatch { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
