use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("buy-in cost {cost} exceeds budget {budget}")]
    Unaffordable { cost: String, budget: String },

    #[error("utility transform is undefined at prize {prize} (got {value})")]
    TransformUndefined { prize: String, value: String },

    #[error("no alternatives to choose from")]
    NoAlternatives,

    #[error("alternative {index} has {found} resources, expected {expected}")]
    ResourceArity {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("action `{action}`: pre and eff declare different variables ({detail})")]
    DomainMismatch { action: String, detail: String },

    #[error("action `{action}` references variable `{variable}` missing from the initial state")]
    UnknownVariable { action: String, variable: String },

    #[error("action `{action}`: {field} must be non-negative, got {value}")]
    NegativeQuantity {
        action: String,
        field: &'static str,
        value: String,
    },

    #[error("plan has {len} actions; exhaustive enumeration is limited to {limit}")]
    PlanTooLong { len: usize, limit: usize },

    #[error("cannot parse rational `{0}`")]
    ParseRational(String),

    #[error("malformed document: {0}")]
    Document(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
