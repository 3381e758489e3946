//! Cooperative games over feature coalitions and the allocations built on them.
//!
//! A [`Game`] stores the worth of every coalition of `d` players as a dense
//! table indexed by bitmask. Value functions in [`value_fns`] turn a model
//! into a game; the routines in [`allocations`] aggregate a game into one
//! payoff per player. The two steps are independent: any game can be fed to
//! any allocation.

pub mod allocations;
pub mod dividends;
mod error;
pub mod expr;
pub mod fixtures;
pub mod game;
pub mod value_fns;

pub use error::{Error, Result};
pub use game::{
    build_game, build_game_serial, dual_game, efficiency_gap, Allocation, Coalition, Game,
    DEFAULT_MAX_PLAYERS, EXACT_TOLERANCE,
};
