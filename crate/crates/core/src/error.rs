use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid residue field: {0}")]
    InvalidField(String),

    #[error("element is not a unit")]
    NotAUnit,

    #[error("precision exhausted")]
    PrecisionExhausted,

    #[error("eta undefined: element vanishes to precision {0}")]
    EtaUndefined(i64),

    #[error("invariants are not strongly regular semisimple")]
    NotStronglyRegular,

    #[error("indeterminate at precision {precision}; need at least {required}")]
    Indeterminate { precision: i64, required: i64 },

    #[error("{field} parity: expected sigma-eigenvalue {expected}")]
    Parity { field: String, expected: i8 },

    #[error("{field} is not integral")]
    NotIntegral { field: String },

    #[error("enumeration budget exceeded (estimated {estimate} subspaces)")]
    BudgetExceeded { estimate: u128 },

    #[error("group constraint violated: {0}")]
    GroupConstraintViolated(String),

    #[error("no residue generator found after {attempts} attempts")]
    GeneratorNotFound { attempts: usize },

    #[error("target valuation {target} not reached after {retries} resamples")]
    TargetUnreachable { target: u32, retries: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
