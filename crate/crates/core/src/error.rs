//! Error type shared by every stage of the forecasting pipeline.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Unsupported or inconsistent configuration (wavelet family, defaults).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The autocorrelation-wavelet inner-product matrix is too badly
    /// conditioned to invert reliably.
    #[error("inner-product matrix for J = {levels} is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { levels: usize, condition: f64 },

    /// A linear system could not be solved even after ridge repair.
    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numerical(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            stage,
            detail: detail.into(),
        }
    }

    /// Re-label a numerical failure with the pipeline stage it surfaced in.
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Numerical { detail, .. } => Error::Numerical { stage, detail },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::IllConditioned { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
