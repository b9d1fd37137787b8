use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Start and target coincide; the hitting time between *different*
    /// configurations is what is defined here.
    #[error("start and target configurations are identical")]
    IdenticalConfigurations,

    #[error("state space has {states} states, exceeding the budget of {budget}")]
    TooLarge { states: BigUint, budget: u64 },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("exact solution could not be certified: {0}")]
    Certification(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),

    #[error("all {replications} replications reached the step cap of {step_cap} without hitting the target")]
    AllTruncated { replications: u64, step_cap: u64 },
}
