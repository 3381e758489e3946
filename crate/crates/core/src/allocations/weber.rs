//! Weber-set allocations: expected marginal contributions under a random order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::order::RandomOrderDistribution;
use super::permutation::{accumulate_marginals, Permutation};
use crate::error::{Error, Result};
use crate::game::{Allocation, Game};

/// Largest `d` for which all `d!` orderings are enumerated.
pub const MAX_UNIFORM_ENUMERATION_PLAYERS: usize = 8;

/// Largest number of linear extensions enumerated exactly (10!).
pub const MAX_ENUMERATED_EXTENSIONS: u128 = 3_628_800;

fn factorial(d: usize) -> u128 {
    (1..=d as u128).product()
}

/// Exact Weber allocation `φ(j) = Σ_π p(π) [v(π^j) − v(π^j \ {j})]`.
///
/// Needs a distribution with enumerable support; sampler-only distributions
/// and oversized supports are rejected in favour of [`weber_monte_carlo`].
pub fn weber_allocate(g: &Game, p: &RandomOrderDistribution) -> Result<Allocation> {
    let d = g.players();
    p.check_players(d)?;
    let mut phi = vec![0.0; d];
    match p {
        RandomOrderDistribution::Uniform => {
            if d > MAX_UNIFORM_ENUMERATION_PLAYERS {
                return Err(Error::SupportTooLarge { count: factorial(d), limit: factorial(MAX_UNIFORM_ENUMERATION_PLAYERS) });
            }
            let weight = 1.0 / factorial(d) as f64;
            let mut perm = Permutation::identity(d);
            loop {
                accumulate_marginals(g, perm.order(), weight, &mut phi);
                if !perm.advance() {
                    break;
                }
            }
            return Ok(Allocation::new("weber-uniform", phi));
        }
        RandomOrderDistribution::Explicit(pmf) => {
            for (perm, prob) in pmf.entries() {
                accumulate_marginals(g, perm.order(), *prob, &mut phi);
            }
        }
        RandomOrderDistribution::PartialOrderUniform(po) => {
            let count = po.extension_count();
            if count > MAX_ENUMERATED_EXTENSIONS {
                return Err(Error::SupportTooLarge { count, limit: MAX_ENUMERATED_EXTENSIONS });
            }
            let weight = 1.0 / count as f64;
            for perm in po.linear_extensions() {
                accumulate_marginals(g, perm.order(), weight, &mut phi);
            }
        }
        RandomOrderDistribution::SeededSampler(_) => {
            return Err(Error::Distribution(
                "sampler-only distribution has no explicit support; use weber_monte_carlo".into(),
            ))
        }
    }
    Ok(Allocation::new("weber", phi))
}

/// Shapley values as the average marginal vector over all `d!` orderings.
pub fn shapley_permutation(g: &Game) -> Result<Allocation> {
    let mut a = weber_allocate(g, &RandomOrderDistribution::Uniform)?;
    a.method = "shapley-permutation".into();
    Ok(a)
}

/// Knobs of the Monte Carlo estimator that do not change its target.
#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    /// Samples per independently seeded chunk. Part of the reproducibility key.
    pub chunk: usize,
    /// Evaluate chunks on the rayon pool. Output is bit-identical either way.
    pub parallel: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { chunk: 256, parallel: true }
    }
}

/// Running mean and sum of squared deviations per player.
#[derive(Clone, Debug)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(d: usize) -> Self {
        Moments { count: 0, mean: vec![0.0; d], m2: vec![0.0; d] }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &xi) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = xi - *mean;
            *mean += delta / n;
            *m2 += delta * (xi - *mean);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for j in 0..self.mean.len() {
            let delta = other.mean[j] - self.mean[j];
            self.mean[j] += delta * nb / n;
            self.m2[j] += other.m2[j] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }
}

/// Monte Carlo estimate of a Weber allocation with per-player standard errors.
///
/// Deterministic for a fixed `(seed, n)` and chunk size; see [`McOptions`].
pub fn weber_monte_carlo(g: &Game, p: &RandomOrderDistribution, n: usize, seed: u64) -> Result<Allocation> {
    weber_monte_carlo_with(g, p, n, seed, McOptions::default())
}

pub fn weber_monte_carlo_with(
    g: &Game,
    p: &RandomOrderDistribution,
    n: usize,
    seed: u64,
    opts: McOptions,
) -> Result<Allocation> {
    if n < 2 {
        return Err(Error::SampleCount(n));
    }
    let d = g.players();
    p.check_players(d)?;
    let chunk = opts.chunk.max(1);
    let chunks = n.div_ceil(chunk);

    let run_chunk = |k: usize| -> Result<Moments> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let size = chunk.min(n - k * chunk);
        let mut moments = Moments::new(d);
        let mut order = Vec::with_capacity(d);
        let mut marg = vec![0.0; d];
        for _ in 0..size {
            p.sample(d, &mut rng, &mut order);
            if order.len() != d {
                return Err(Error::Distribution(format!("sampler produced an ordering of {} players", order.len())));
            }
            marg.fill(0.0);
            accumulate_marginals(g, &order, 1.0, &mut marg);
            moments.push(&marg);
        }
        Ok(moments)
    };

    let parts: Vec<Moments> = if opts.parallel {
        (0..chunks).into_par_iter().map(run_chunk).collect::<Result<_>>()?
    } else {
        (0..chunks).map(run_chunk).collect::<Result<_>>()?
    };

    let mut total = Moments::new(d);
    for part in &parts {
        total.merge(part);
    }
    let nf = n as f64;
    let stderr = total.m2.iter().map(|m2| (m2 / (nf - 1.0)).max(0.0).sqrt() / nf.sqrt()).collect();
    Ok(Allocation::new("weber-mc", total.mean).with_stderr(stderr))
}
