use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum TopfError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("inconsistent column count at line {line}: expected {expected}, found {found}")]
    ColumnMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate point configuration: {0}")]
    Degenerate(String),

    #[error("duplicate point: indices {0} and {1} have identical coordinates")]
    DuplicatePoint(usize, usize),

    #[error("simplex budget exceeded: {count} simplices > budget {budget}")]
    BudgetExceeded { count: usize, budget: usize },

    #[error("dimension {dim} out of range (complex has simplices up to dimension {max_dim})")]
    DimensionOutOfRange { dim: usize, max_dim: usize },

    #[error(
        "least-squares solver did not reach tolerance within {iterations} iterations \
         (boundary residual {boundary_residual:.3e}, coboundary residual {coboundary_residual:.3e})"
    )]
    SolverNotConverged {
        iterations: usize,
        boundary_residual: f64,
        coboundary_residual: f64,
    },

    #[error("degenerate harmonic representative: chain is identically zero")]
    DegenerateFeature,

    #[error("feature {index} (dim {dim}, birth {birth:.6}, death {death:.6}): {source}")]
    Feature {
        index: usize,
        dim: usize,
        birth: f64,
        death: f64,
        #[source]
        source: Box<TopfError>,
    },

    #[error("unknown benchmark dataset: {0}")]
    UnknownDataset(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, TopfError>;
