//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or experiment description is invalid before any work starts.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A qubit index does not address a qubit of the state.
    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    IndexOutOfRange { index: usize, num_qubits: usize },

    /// A two-qubit operation was given the same qubit twice.
    #[error("two-qubit operation requires distinct qubits, got {0} twice")]
    DuplicateQubit(usize),

    /// An operation was called on a state representation that does not support it.
    #[error("operation requires {required} mode")]
    Mode { required: &'static str },

    /// Numerical data violates a documented precondition.
    #[error("invalid data: {0}")]
    Data(String),

    /// An object is in the wrong lifecycle state for the requested operation.
    #[error("invalid state: {0}")]
    State(String),

    /// An I/O failure, annotated with the path involved.
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: 1 for configuration/data problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
