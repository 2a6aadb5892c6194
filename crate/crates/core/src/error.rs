use thiserror::Error;

pub type Result<T> = std::result::Result<T, VqsdError>;

#[derive(Debug, Error)]
pub enum VqsdError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("operation requires a density matrix; convert the pure state first")]
    RequiresDensity,

    #[error("expected {expected} parameters, got {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned NaN at evaluation {evaluation}")]
    NanObjective { evaluation: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for VqsdError {
    fn from(e: serde_json::Error) -> Self {
        VqsdError::Parse(e.to_string())
    }
}
