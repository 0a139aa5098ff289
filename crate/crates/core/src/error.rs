use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("vanishing denominator in {0}")]
    VanishingDenominator(String),
    #[error("degenerate polytope (dimension {0})")]
    Degenerate(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("parameter regime violation: {0}")]
    Regime(String),
    #[error("missing auxiliary input: {0}")]
    MissingAux(String),
    #[error("insufficient scales: {0}")]
    InsufficientScales(String),
    #[error("empty windows: {0}")]
    EmptyWindows(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
