use thiserror::Error;

/// Errors raised when a model, trajectory or planner input breaks its invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: String, reason: String },

    #[error("{limbs} limbs but {states} joint states")]
    LengthMismatch { limbs: usize, states: usize },

    #[error("unknown limb id {0}")]
    UnknownLimb(u32),

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u64 },
}

impl SimError {
    pub(crate) fn invalid(what: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::InvalidInput {
            what: what.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
