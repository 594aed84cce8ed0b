use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate coupling: lambda1 = lambda2 = 0 leaves the anisotropy undefined")]
    DegenerateCoupling,

    #[error("domain error: {param} = {value}: {reason}")]
    Domain {
        param: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("outside the normal phase: g = {g}, gamma = {gamma}, delta_g = {delta_g} <= 0")]
    NotNormalPhase { g: f64, gamma: f64, delta_g: f64 },

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation insufficient at n = {n}: population {leak:e} beyond the guard band (tolerance {tol:e})")]
    TruncationInsufficient { n: usize, leak: f64, tol: f64 },

    #[error("no convergence up to n_max = {n_max}: last two values {previous} and {last}")]
    NonConvergence {
        n_max: usize,
        previous: f64,
        last: f64,
    },

    #[error("operator is not Hermitian: residual {residual:e}")]
    NonHermitian { residual: f64 },

    #[error("verification failed: {check}: residual {residual:e} exceeds {tolerance:e}")]
    VerificationFailed {
        check: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid inputs rather than by the numerics.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCoupling
                | Error::Domain { .. }
                | Error::NotNormalPhase { .. }
                | Error::BasisMismatch { .. }
                | Error::DimensionMismatch { .. }
        )
    }
}
