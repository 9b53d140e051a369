use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("size cap exceeded: {what} has size {size}, cap is {cap}")]
    CapExceeded { what: String, size: usize, cap: usize },
    #[error("symbol name clash: {0}")]
    NameClash(String),
    #[error("missing symbol: {0}")]
    MissingSymbol(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("invalid coalgebra: {0}")]
    InvalidCoalgebra(String),
    #[error("invalid homomorphism: {0}")]
    InvalidHomomorphism(String),
    #[error("counter overflow while counting homomorphisms")]
    Overflow,
    #[error("unbound variable: {0}")]
    UnboundVariable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
