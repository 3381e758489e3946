use thiserror::Error;

use crate::game::Coalition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("player count {d} outside supported range 1..={max}")]
    PlayerCount { d: usize, max: usize },

    #[error("expected {expected} coalition values for d={d}, got {got}")]
    TableSize { d: usize, expected: usize, got: usize },

    #[error("non-finite value {value} at coalition {coalition}")]
    NonFinite { coalition: Coalition, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("random order distribution: {0}")]
    Distribution(String),

    #[error("support of {count} orderings exceeds enumeration limit {limit}; use weber_monte_carlo")]
    SupportTooLarge { count: u128, limit: u128 },

    #[error("partial order contains a cycle through player {player}")]
    Cycle { player: usize },

    #[error("weight system invalid at coalition {coalition}: {reason}")]
    WeightSystem { coalition: Coalition, reason: String },

    #[error("coalition {coalition} has non-positive value {value}")]
    NonPositive { coalition: Coalition, value: f64 },

    #[error("dual game has negative value {value} at coalition {coalition}")]
    NegativeDual { coalition: Coalition, value: f64 },

    #[error("epsilon extrapolation did not converge (last step change {change:e})")]
    NoConvergence { change: f64 },

    #[error("sample count {0} too small (need at least 2)")]
    SampleCount(usize),

    #[error("invalid gaussian specification: {0}")]
    Gaussian(String),

    #[error("conditioning block for coalition {coalition} is singular")]
    Singular { coalition: Coalition },

    #[error("model: {0}")]
    Model(String),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("zero total variance cannot be normalized")]
    ZeroVariance,
}
