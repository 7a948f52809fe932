//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("error probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),

    #[error("fold scale must be an odd integer >= 1, got {0}")]
    InvalidFoldScale(u32),

    #[error("circuit width {width} exceeds the configured maximum of {max} qubits")]
    WidthExceeded { width: usize, max: usize },

    #[error("density matrix diagonal has negative entry {value} at index {index}")]
    InvalidState { index: usize, value: f64 },

    #[error("depolarizing channel with p = {0} is not representable as a quasiprobability (requires p < 0.75)")]
    NotRepresentable(f64),

    #[error("singular sample matrix for scale vectors {0}")]
    SingularSystem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    DataFormat {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
