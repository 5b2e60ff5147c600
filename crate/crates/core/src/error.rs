use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The coupling matrix no longer has the periodic structure needed for
    /// the superspin reduction (e.g. positional disorder).
    #[error("symmetry broken: {0}")]
    SymmetryBroken(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// State lies outside the maximal-Casimir sector of some superspin.
    #[error("unsupported sector: {0}")]
    UnsupportedSector(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("numerical state error: {0}")]
    NumericalState(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension guard: N = {n_sites} exceeds the {mode} limit of {limit}; {hint}")]
    DimensionGuard {
        n_sites: usize,
        limit: usize,
        mode: &'static str,
        hint: &'static str,
    },

    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
