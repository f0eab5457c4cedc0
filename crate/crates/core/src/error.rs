use thiserror::Error;

use crate::interval::IntervalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    /// The bracketing certificate of a root equation could not be verified.
    #[error("root bracketing failed: {0}")]
    RootFailure(String),
    /// Neither case of the two-inequality combiner yields a finite bound.
    #[error("no finite bound: {0}")]
    NoBound(&'static str),
    /// The rough enclosure could not be validated within the inflation budget.
    #[error("rough enclosure failed after {attempts} attempts")]
    EnclosureFailure { attempts: usize },
    #[error("step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
