use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("division by a scalar whose constant term is zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fixed-point iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("reference integrator step {step:e} fell below the underflow limit")]
    StepUnderflow { step: f64 },
    #[error("errors too small to estimate an order ({0:e})")]
    DegenerateError(f64),
    #[error("method cannot be expanded as a power series: {0}")]
    UnsupportedMethod(String),
    #[error("multistep scheme is not weakly stable (sum m*alpha_m = 0)")]
    NotWeaklyStable,
    #[error("multistep scheme is not consistent: {0}")]
    NotConsistent(String),
    #[error("unknown method id `{0}`")]
    UnknownMethodId(String),
    #[error("odd dimension {0}; a canonical (p, q) split needs an even dimension")]
    OddDimension(usize),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("invalid multistep scheme: {0}")]
    InvalidScheme(String),
    #[error("non-finite loss {loss} at update {step}")]
    NonFinite { step: usize, loss: f64 },
    #[error("order needs strictly positive errors, got {0:e} and {1:e}")]
    NonPositiveError(f64, f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("unsupported operation in trace: {0}")]
    UnsupportedPrimitive(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
