use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max |A - A^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("operator constraint violated: {0}")]
    Constraint(String),

    #[error("outcome probabilities sum to {0}, which deviates from 1 beyond tolerance")]
    ProbabilityMass(f64),

    #[error("smoothing parameter {0} is outside [0, 1)")]
    InvalidEpsilon(f64),

    #[error("method `{method}` cannot handle {cells} support cells (limit {limit})")]
    MethodSize { method: &'static str, cells: usize, limit: usize },

    #[error("register U is not classical: off-diagonal block entry of size {0:e}")]
    NonClassicalRegister(f64),

    #[error("Neyman-Pearson bisection did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded { what: &'static str, needed: u128, cap: u128 },

    #[error("infeasible parameters, constraint {constraint} violated: {detail}")]
    Infeasible { constraint: &'static str, detail: String },

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
