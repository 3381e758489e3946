//! Reference games shared by tests, the verifier and the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Coalition, Game};

/// Two players: v(∅)=0, v({1})=1, v({2})=2, v({1,2})=4.
pub fn g2() -> Game {
    Game::new(2, vec![0.0, 1.0, 2.0, 4.0]).unwrap()
}

/// Normalized closed-Sobol game of `f(X) = X1 + X2` with standard Gaussian
/// inputs and `Corr(X1, X3) = rho`, all other pairs independent.
pub fn g3_rho(rho: f64) -> Game {
    let r2 = rho * rho;
    // masks: ∅, {1}, {2}, {1,2}, {3}, {1,3}, {2,3}, D
    Game::new(3, vec![0.0, 0.5, 0.5, 1.0, r2 / 2.0, 0.5, (1.0 + r2) / 2.0, 1.0]).unwrap()
}

/// Unanimity game of `carrier`: worth 1 exactly on supersets of it.
pub fn unanimity(d: usize, carrier: Coalition) -> Game {
    let values = (0..1u32 << d).map(|m| if carrier.is_subset_of(Coalition(m)) { 1.0 } else { 0.0 }).collect();
    Game::new(d, values).unwrap()
}

/// `v(A) = Σ_{i∈A} weights[i]`.
pub fn additive(weights: &[f64]) -> Game {
    let d = weights.len();
    let values = (0..1u32 << d).map(|m| Coalition(m).players().map(|i| weights[i]).sum()).collect();
    Game::new(d, values).unwrap()
}

/// Game with every value (including v(∅)) uniform in [-1, 1).
pub fn random_game<R: Rng>(d: usize, rng: &mut R) -> Game {
    let values = (0..1usize << d).map(|_| rng.random_range(-1.0..1.0)).collect();
    Game::new(d, values).unwrap()
}

pub fn random_game_seeded(d: usize, seed: u64) -> Game {
    random_game(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Game with every nonempty coalition worth uniform in [0.1, 2) and v(∅) = 0.
pub fn random_positive_game<R: Rng>(d: usize, rng: &mut R) -> Game {
    let values = (0..1usize << d).map(|m| if m == 0 { 0.0 } else { rng.random_range(0.1..2.0) }).collect();
    Game::new(d, values).unwrap()
}
