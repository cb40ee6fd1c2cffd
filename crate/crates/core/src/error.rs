use thiserror::Error;

/// Errors raised by dataset handling, index evaluation and the statistical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("singular design: column '{column}' is linearly dependent on earlier columns")]
    SingularDesign { column: String },

    #[error("index definition error: {0}")]
    Definition(String),

    #[error("ANOVA is undefined for an intercept-only model")]
    UndefinedAnova,

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("schema mismatch: missing columns [{}]", missing.join(", "))]
    Schema { missing: Vec<String> },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
