use std::path::PathBuf;

use thiserror::Error;

use crate::estimator::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid system dimensions: {0}")]
    InvalidDims(String),

    #[error("infeasible system: {0}")]
    Infeasible(FeasibilityReport),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A least-squares update whose Khatri-Rao factor lost column rank.
    #[error("ill-posed {step} update{}: effective rank {rank} < {required}", iteration_suffix(*.iteration))]
    IllPosed {
        step: &'static str,
        rank: usize,
        required: usize,
        iteration: Option<usize>,
    },

    #[error("zero first-column entry in row {row}; scaling cannot be fixed")]
    DegenerateScaling { row: usize },

    #[error("reference matrix has zero norm")]
    ZeroReference,

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sweep rejected before any trial ran.
    #[error("pre-flight check failed: {}", .0.join("; "))]
    Preflight(Vec<String>),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialization(String),
}

fn iteration_suffix(iteration: Option<usize>) -> String {
    iteration.map(|i| format!(" at iteration {i}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn at_iteration(self, i: usize) -> Self {
        match self {
            Error::IllPosed {
                step,
                rank,
                required,
                ..
            } => Error::IllPosed {
                step,
                rank,
                required,
                iteration: Some(i),
            },
            other => other,
        }
    }
}
