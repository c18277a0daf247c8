use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains no rows")]
    EmptyInput,
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {0} has no observed features")]
    RowAllMissing(usize),
    #[error("non-finite observed value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("value and mask buffers do not match an {n}x{p} layout")]
    ShapeMismatch { n: usize, p: usize },
    #[error("requested {k} clusters but only {n} rows are available")]
    KGreaterThanN { k: usize, n: usize },
    #[error("number of clusters must be at least 1")]
    ZeroClusters,
    #[error("cluster {0} has a single member and cannot give it up")]
    LastMember(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("distortion is zero at K = {0}")]
    ZeroDistortion(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("could not place {k} centers with separation {separation} after {attempts} attempts")]
    InfeasibleSeparation {
        k: usize,
        separation: f64,
        attempts: usize,
    },
    #[error("censoring rate {rate} is not below 1")]
    InfeasibleRate { rate: f64 },
    #[error("adjusted Rand index is undefined for these partitions")]
    DegenerateDenominator,
}

pub type Result<T> = std::result::Result<T, Error>;
