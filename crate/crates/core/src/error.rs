use thiserror::Error;

/// Errors surfaced by the library. Precondition messages name the failing
/// inequality so callers (and the CLI) can report it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("division by zero in GF(2^{q})")]
    DivisionByZero { q: u32 },

    #[error("wrong formula kind: {0}")]
    Kind(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
