use thiserror::Error;

/// Errors raised by trust inference operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid observation: {0}")]
    InvalidObservation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every particle received zero likelihood, i.e. the observation is
    /// impossible under the model.
    #[error("degenerate update: all particle likelihoods are zero")]
    DegenerateUpdate,

    #[error("utility evaluation produced a non-finite value")]
    NonFiniteUtility,

    /// A shipped component violated an internal guarantee (e.g. a transition
    /// produced an out-of-bounds sample).
    #[error("internal contract violation: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
