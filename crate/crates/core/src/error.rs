use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Numerical tolerance violations on *inputs* are
/// errors; measured violations of physical properties are data, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {dim} does not factor as {a}x{b}")]
    BadFactorization { dim: usize, a: usize, b: usize },

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid outcome probability function: {0}")]
    InvalidOpf(String),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("measurement is not projective (deviation {deviation:.3e})")]
    NotProjective { deviation: f64 },

    #[error("weights do not form a probability distribution: {0}")]
    BadWeights(String),

    #[error("symmetric subspace of total dimension {requested} exceeds the size cap {cap}")]
    SizeCapExceeded { requested: usize, cap: usize },

    #[error("operation is defined for tensor power k=1 only, got k={got}")]
    UnsupportedPower { got: usize },

    #[error("not enough samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),
}
