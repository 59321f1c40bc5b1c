use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} points, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid partition sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("exhaustive reordering refused: {len} partitions exceeds the cap of {cap}")]
    ReorderCapExceeded { len: usize, cap: usize },

    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    #[error("simplex {0:?} is not in the complex")]
    SimplexNotFound(Vec<usize>),

    #[error("invalid filtered complex: {0}")]
    InvalidComplex(String),

    #[error("dimension {dim} out of range (homology is reported for dimensions 0..={max})")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),

    #[error("oracle refused: sublevel complex has {cells} cells (cap {cap})")]
    OracleCapExceeded { cells: usize, cap: usize },

    #[error(
        "filtrations are defined on different cell sets ({0}); append the trivial one-cluster \
         partition to the tail of both sequences so that their final complexes coincide"
    )]
    CellSetMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("average hierarchy is undefined for a single partition")]
    UndefinedAverage,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
