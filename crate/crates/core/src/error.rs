use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid cyclic factor {0}: every factor must be at least 2")]
    InvalidFactor(u64),

    #[error("group of order {order} exceeds the configured cap of {cap}")]
    GroupTooLarge { order: u64, cap: usize },

    #[error("malformed token `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("coordinate {value} out of range for factor {factor}")]
    CoordinateOutOfRange { value: u64, factor: u32 },

    #[error("sequence is not a sub-form of the sequence it is subtracted from")]
    NotContained,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("operation requires a cyclic group, got rank {0}")]
    NotCyclic(usize),

    #[error("sequence is not zero-sum")]
    NotZeroSum,

    #[error("sequence contains the zero element")]
    ContainsZero,

    #[error("explicit member `{0}` is not a nonempty zero-sum sequence")]
    NotInB(String),

    #[error("monotone contract violated: P({sub}) holds but P({sup}) does not")]
    PropertyContract { sub: String, sup: String },

    #[error("multiplicity cap {cap} for element {element} is not safe: the capped power fails the property")]
    UnsafeCap { element: String, cap: u32 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("omega schema error: {0}")]
    Schema(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_))
    }
}
