use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the estimation and reporting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (leading minor {minor} failed)")]
    NotPositiveDefinite { minor: usize },

    #[error("constraint matrix is rank deficient: {0}")]
    ConstraintRank(String),

    #[error("conditional precision of the missing data is singular at {cell}")]
    Singular { cell: String },

    #[error("target density evaluated to NaN at {0}")]
    TargetEvaluation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid sampler settings: {0}")]
    Settings(String),

    #[error("invalid input data: {0}")]
    Data(String),

    #[error("transformation failed for series {series} at {date}: {reason}")]
    Transformation {
        series: String,
        date: String,
        reason: String,
    },

    #[error("unsupported release calendar: {0}")]
    Calendar(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid counterfactual or report request: {0}")]
    Spec(String),

    #[error("unstable dynamics: companion spectral radius {0:.4} >= 1")]
    Unstable(f64),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("sampler failed at iteration {iteration} (state {digest}): {source}")]
    Sampler {
        iteration: usize,
        digest: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. }
            | Error::ConstraintRank(_)
            | Error::Singular { .. }
            | Error::TargetEvaluation(_)
            | Error::Sampler { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
