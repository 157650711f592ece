use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabets do not match")]
    AlphabetMismatch,
    #[error("event `{0}` carries different attributes in different components")]
    AttributeConflict(String),
    #[error("event `{0}` is observable in one component but not in another")]
    ObservabilityIncompatibility(String),
    #[error("plant must be live and convergent: {0}")]
    AssumptionViolated(String),
    #[error("the plant has no fault-ending string")]
    EmptyFaultLanguage,
    #[error("the plant is not prognosable")]
    NotPrognosable,
    #[error("synthesis for component {0} returned no solution")]
    ComponentSynthesisFailed(usize),
    #[error("product exceeds the state budget of {0}")]
    ProductTooLarge(usize),
    #[error("refined plant has {found} states, budget is {budget}")]
    BudgetExceeded { found: usize, budget: usize },
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
