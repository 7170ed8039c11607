use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QslError>;

#[derive(Debug, Error)]
pub enum QslError {
    #[error("index {index} outside the usable range [{lo}, {hi}]")]
    Range { index: i64, lo: i64, hi: i64 },

    #[error("reversed bounds: {from} > {to}")]
    ReversedBounds { from: i64, to: i64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numeric failure at lattice index {index}: {detail}")]
    NumericAt { index: i64, detail: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("stale eigenvalue {lambda}: normalized shooting residual {residual:e}")]
    StaleEigenvalue { lambda: f64, residual: f64 },

    #[error("{}:{line}: {message}", path.display())]
    Ingestion {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl QslError {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            QslError::NumericAt { .. } | QslError::Numeric(_) | QslError::StaleEigenvalue { .. }
        )
    }

    pub(crate) fn range(index: i64, lo: i64, hi: i64) -> Self {
        QslError::Range { index, lo, hi }
    }
}
