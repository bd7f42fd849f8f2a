use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a run that completed without detecting a violation.
pub const EXIT_OK: u8 = 0;
/// Some applicable bound is exceeded at the one-sided 95% level.
pub const EXIT_VIOLATION: u8 = 1;
/// Infeasible parameters or a size cap.
pub const EXIT_INFEASIBLE: u8 = 2;
/// Unreadable or malformed input.
pub const EXIT_PARSE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),

    #[error("error budget: {0}")]
    Budget(String),

    #[error(transparent)]
    Core(#[from] marton::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use marton::Error as E;
        match self {
            Self::Read { .. } | Self::Parse { .. } | Self::Usage(_) => EXIT_PARSE,
            Self::Write { .. } | Self::Csv(_) | Self::Budget(_) => EXIT_INFEASIBLE,
            Self::Core(e) => match e {
                E::Infeasible { .. } | E::CapExceeded { .. } | E::MethodSize { .. } | E::NoConvergence(_) => EXIT_INFEASIBLE,
                E::InvalidDistribution(_)
                | E::DimensionMismatch(_)
                | E::NotHermitian(_)
                | E::NotPsd(_)
                | E::InvalidTrace(_)
                | E::Constraint(_)
                | E::ProbabilityMass(_)
                | E::InvalidEpsilon(_)
                | E::NonClassicalRegister(_)
                | E::UnknownSymbol(_)
                | E::InvalidInput(_)
                | E::Json(_) => EXIT_PARSE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
