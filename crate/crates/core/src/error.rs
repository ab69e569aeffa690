use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("field mismatch: GF(2^{0}) vs GF(2^{1})")]
    FieldMismatch(u32, u32),

    #[error("height mismatch: {0} vs {1}")]
    HeightMismatch(String, String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("divided power x^({r}) of {what} leaves the truncated ring")]
    UndefinedDividedPower { r: u32, what: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("bound exceeded: {0}")]
    Bound(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
