//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two fields (or a field and an operation) disagree on grid geometry.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A cutoff support sticks out of a non-periodic grid axis.
    #[error("support outside grid: {0}")]
    SupportOutsideGrid(String),

    /// A field contains NaN or infinite values.
    #[error("non-finite values: {0}")]
    NonFinite(String),

    /// No valid cover exists for the requested (K1, K2) at this scale.
    /// The minimal feasible constants for the lattice construction are reported.
    #[error("infeasible cover at R={r}: n={n} needs K1 >= {min_k1}, multiplicity needs K2 >= {min_k2} (got K1={k1}, K2={k2})")]
    InfeasibleCover {
        r: f64,
        n: usize,
        k1: usize,
        k2: usize,
        min_k1: usize,
        min_k2: usize,
    },

    /// A scale range or snapshot list is empty where data is required.
    #[error("empty range: {0}")]
    EmptyRange(String),

    /// File format violation (bad magic, header, or payload size).
    #[error("field file format: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to (2 validation, 3 I/O).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Format(_) => 3,
            _ => 2,
        }
    }
}
