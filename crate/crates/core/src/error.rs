use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis mismatch: [{left}] vs [{right}]")]
    BasisMismatch { left: String, right: String },

    #[error("vector has length {got}, basis has {expected} units")]
    LengthMismatch { expected: usize, got: usize },

    #[error("scale factor {0} is not strictly positive")]
    NonPositiveScale(f64),

    #[error("quantity with value 0 is not invertible")]
    NotInvertible,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("c^alpha overflows: log magnitude {0} exceeds 700")]
    ScaleOverflow(f64),

    #[error("unknown unit symbol `{0}`")]
    UnknownUnit(String),

    #[error("unit expression error at byte {pos}: {msg}")]
    UnitSyntax { pos: usize, msg: String },

    #[error("expression syntax error at byte {pos}: {msg}")]
    ExprSyntax { pos: usize, msg: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid rational `{0}`")]
    InvalidRational(String),

    #[error("matrix contains non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("function evaluation failed at v = {at:?}: {msg}")]
    Evaluation { at: Vec<f64>, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("registry data: {0}")]
    Registry(String),

    #[error("problem file: {0}")]
    Problem(String),
}
