use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate token `{name}`")]
    DuplicateToken { line: usize, name: String },
    #[error("line {line}: undeclared token `{name}`")]
    UndeclaredToken { line: usize, name: String },
    #[error("line {line}: generator is not a clique: {generator}")]
    NonCliqueGenerator { line: usize, generator: String },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("stability violation: {0}")]
    Stability(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
