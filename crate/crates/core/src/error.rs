use thiserror::Error;

/// Errors raised by the physical and decision models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("frequency {frequency_hz} Hz outside the 1-50 GHz dry-air model window")]
    FrequencyOutOfRange { frequency_hz: f64 },

    #[error("payload power must be > 0 W to compute energy efficiency")]
    ZeroPower,

    #[error("mode link has zero capacity; destination unreachable")]
    Unreachable,
}

impl ModelError {
    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            key,
            reason: reason.into(),
        }
    }
}
