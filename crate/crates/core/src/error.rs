use thiserror::Error;

/// Errors raised by the decomposition kernels and everything built on them.
#[derive(Debug, Error)]
pub enum CurError {
    #[error("{op}: dimension mismatch ({detail})")]
    Dimension { op: &'static str, detail: String },

    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("index {index} is out of range for a universe of {universe}")]
    IndexOutOfRange { index: usize, universe: usize },

    #[error("index {index} appears more than once")]
    DuplicateIndex { index: usize },

    #[error("{op}: singular value decomposition did not converge")]
    NoConvergence { op: &'static str },

    #[error("{op}: matrix is singular ({detail})")]
    Singular { op: &'static str, detail: String },

    #[error("{op}: matrix is rank deficient ({detail})")]
    RankDeficient { op: &'static str, detail: String },

    #[error("columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CurError {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        CurError::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        CurError::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CurError>;
