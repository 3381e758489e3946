//! Value functions: games built from a model and a description of the
//! feature distribution.

mod games;
mod gaussian;
mod model;
mod quadratic;
mod sobol;

use rayon::prelude::*;

pub use games::{conditional_gaussian_game, conditional_gaussian_game_with, conditional_mc_game, conditional_mc_game_detailed, marginal_game};
pub use gaussian::{gaussian_conditional, ConditionalGaussian, Conditioner, GaussianSpec};
pub use model::{Dataset, ExprModel, FnModel, Model};
pub use sobol::{sobol_closed_game, sobol_total_game, SobolMc, SobolOptions};

use crate::error::Result;
use crate::game::{check_players, Coalition, Game, DEFAULT_MAX_PLAYERS};

/// Evaluates a fallible coalition oracle on every mask; the lowest failing
/// mask determines the error.
fn tabulate<F>(d: usize, serial: bool, oracle: F) -> Result<Game>
where
    F: Fn(Coalition) -> Result<f64> + Sync,
{
    check_players(d, DEFAULT_MAX_PLAYERS)?;
    let values: Vec<f64> = if serial {
        (0..1u32 << d).map(|m| oracle(Coalition(m))).collect::<Result<_>>()?
    } else {
        let results: Vec<Result<f64>> = (0..1u32 << d).into_par_iter().map(|m| oracle(Coalition(m))).collect();
        results.into_iter().collect::<Result<_>>()?
    };
    Game::new(d, values)
}
