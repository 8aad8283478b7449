use thiserror::Error;

use crate::density::DeOutcome;
use crate::observation::Observation;

#[derive(Clone, Debug, Error)]
pub enum Error {
    #[error("{name} = {value} must lie strictly inside (0, 1)")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("number of sources must be at least {min}, got {got}")]
    TooFewSources { min: usize, got: usize },

    #[error("operation requires the {expected} strategy")]
    WrongStrategy { expected: &'static str },

    #[error("operation requires symmetric sources, got q01 = {q01}, q10 = {q10}")]
    AsymmetricSource { q01: f64, q10: f64 },

    #[error("count {count} is outside 0..={max}")]
    CountOutOfRange { count: usize, max: usize },

    #[error("conditional observation law undefined: count transition {from} -> {to} has zero probability")]
    UndefinedConditional { from: usize, to: usize },

    #[error("observation {0:?} is impossible under the model and the current posterior")]
    ImpossibleObservation(Observation),

    #[error("brute-force posterior limited to {max_sources} sources and {max_len} slots, got {sources} and {len}")]
    OracleTooLarge {
        sources: usize,
        len: usize,
        max_sources: usize,
        max_len: usize,
    },

    #[error("llr grid needs an odd number of points >= 3 and a positive range, got {points} points over +-{llr_max}")]
    InvalidGrid { points: usize, llr_max: f64 },

    #[error("invalid simulation setup: {0}")]
    InvalidSimulation(String),

    #[error("density evolution did not converge after {} iterations (last change {:.3e})", .0.iterations, .0.last_change)]
    NotConverged(Box<DeOutcome>),
}

pub type Result<T> = std::result::Result<T, Error>;
