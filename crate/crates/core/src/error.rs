use thiserror::Error;

/// Failures raised by the algebraic and numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live in different Grassmann algebras ({0} vs {1} generators)")]
    AlgebraMismatch(usize, usize),
    #[error("generator index {index} out of range for an algebra with {n} generators")]
    GeneratorOutOfRange { index: usize, n: usize },
    #[error("dense Grassmann storage supports at most {max} generators, got {n}")]
    TooManyGenerators { n: usize, max: usize },
    #[error("body is zero or on the branch cut: {0}")]
    Branch(String),
    #[error("singular body: {0}")]
    Singular(String),
    #[error("format mismatch: {0}")]
    Format(String),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
