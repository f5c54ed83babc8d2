use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("query direction is not a unit vector (norm = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A hard precondition of an operation does not hold on the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle failed on query {index}: {source}")]
    Oracle {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sampling budget of {attempts} attempts exhausted: {what}")]
    BudgetExhausted { attempts: usize, what: String },

    #[error("no soft envelope found: {0}")]
    EnvelopeNotFound(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
