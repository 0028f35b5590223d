use thiserror::Error;

use crate::conic::SolveStatus;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {what} would be {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not a density matrix: {0}")]
    NotAState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("eigensolver did not converge after {rotations} rotations (off-diagonal residual {residual:.3e})")]
    EigenConvergence { rotations: usize, residual: f64 },

    #[error("conic solver finished with status {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },

    #[error("numerical failure in conic solver: {detail} (condition estimate {condition:.3e})")]
    Numerical { detail: String, condition: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
