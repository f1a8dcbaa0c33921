use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("size {got} is below the minimum {min}")]
    TooSmall { got: usize, min: usize },
    #[error("size {got} exceeds the maximum {max}")]
    TooLarge { got: usize, max: usize },
    #[error("dirac kind {kind} is incompatible with {topology} topology")]
    IncompatibleKind { kind: String, topology: String },
    #[error("function has {got} values, lattice has {expected} sites")]
    LengthMismatch { expected: usize, got: usize },
    #[error("site index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("solver did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("graph has no arrows")]
    NoArrows,
    #[error("invalid graph: {0}")]
    InvariantViolation(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
