use thiserror::Error;

/// Errors produced by the simulation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("parameter index {index} out of range for {count} parameters")]
    ParamOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamCountMismatch { expected: usize, got: usize },

    #[error("explicit gate matrix is not unitary (max |U\u{2020}U - I| = {deviation:.3e})")]
    NonUnitaryMatrix { deviation: f64 },

    #[error("{context}: {n_qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits {
        context: &'static str,
        n_qubits: usize,
        max: usize,
    },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("sample count K must be at least 1")]
    ZeroSamples,

    #[error("all measurement outcomes fall below the probability floor; rotator is degenerate")]
    DegenerateCfim,

    #[error("matrix is singular (min eigenvalue {min_eig:.3e}); full-rank input required")]
    SingularMatrix { min_eig: f64 },

    #[error("invalid Pauli character '{ch}' in \"{string}\"")]
    InvalidPauliChar { ch: char, string: String },

    #[error("Pauli string \"{string}\" has length {got}, expected {expected}")]
    PauliLengthMismatch {
        string: String,
        got: usize,
        expected: usize,
    },

    #[error("coefficient for \"{string}\" is not finite")]
    NonFiniteCoefficient { string: String },

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("{0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
