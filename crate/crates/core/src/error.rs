use thiserror::Error;

use crate::series::ConvergenceReport;

/// Errors produced by the special functions, series evaluators and densities.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("series did not converge within degree {}", .0.max_degree)]
    Convergence(Box<ConvergenceReport>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported algebra: beta = {0} has no validated linear algebra (supply spectra directly)")]
    UnsupportedAlgebra(u32),

    #[error("matrix is not self-adjoint: {0}")]
    NotSelfAdjoint(String),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("radial integral of the generator diverges: {0}")]
    DivergentIntegral(String),
}

pub type Result<T> = std::result::Result<T, Error>;
