//! Efficient allocations of a game: the Weber family (expected marginal
//! contributions under a distribution over player orderings), the Harsanyi
//! family (dividends shared by a weight system), and proportional rules.

mod harsanyi;
mod order;
mod permutation;
mod proportional;
mod shapley;
mod weber;

pub use harsanyi::{harsanyi_allocate, WeightPreset, WeightSystem};
pub use order::{causal_orderings, ExplicitPmf, OrderSampler, PartialOrder, PointMassSampler, RandomOrderDistribution};
pub use permutation::{marginal_vector, Permutation};
pub use proportional::{pme, proportional_value, PME_EPSILON_LADDER, PME_STEP_TOLERANCE};
pub use shapley::{shapley_direct, shapley_dividends};
pub use weber::{
    shapley_permutation, weber_allocate, weber_monte_carlo, weber_monte_carlo_with, McOptions,
    MAX_ENUMERATED_EXTENSIONS, MAX_UNIFORM_ENUMERATION_PLAYERS,
};
