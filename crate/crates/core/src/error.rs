use std::io;

use thiserror::Error;

/// Errors produced by the embedding library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate landmark set: {0}")]
    DegenerateLandmarks(String),

    #[error("graph admits no laterative ordering discoverable by greedy search")]
    NotLaterable,

    /// The frontier walk stalled because the remaining nodes only see
    /// degenerate landmark sets. `step` is the number of nodes placed so far.
    #[error("lateration stalled on degenerate landmarks after placing {step} nodes")]
    DegenerateStep { step: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("scenario infeasible: {0}")]
    ScenarioInfeasible(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
