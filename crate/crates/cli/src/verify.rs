use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coalition_core::allocations::{
    harsanyi_allocate, marginal_vector, shapley_direct, shapley_dividends, shapley_permutation, weber_allocate,
    weber_monte_carlo, Permutation, RandomOrderDistribution, WeightSystem, MAX_UNIFORM_ENUMERATION_PLAYERS,
};
use coalition_core::dividends::{dividends_fast, zeta_reconstruct, DividendTable};
use coalition_core::{efficiency_gap, Allocation, Game};

use crate::attribute::efficiency_tolerance;
use crate::error::CliResult;
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Perturb one Harsanyi dividend before reconstruction.
    Dividends,
}

/// Check the identities every game must satisfy.
#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Game JSON file.
    pub game: PathBuf,
    /// Seed for the sampled permutations.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

struct Check {
    name: &'static str,
    deviation: f64,
    tolerance: f64,
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn gap(g: &Game, a: &Allocation) -> f64 {
    efficiency_gap(g, a).expect("allocation sized to game").abs()
}

pub fn run(args: &VerifyArgs) -> CliResult<bool> {
    let g = io::load_game(&args.game)?;
    let d = g.players();
    let tol = efficiency_tolerance(&g);
    let enumerable = d <= MAX_UNIFORM_ENUMERATION_PLAYERS;
    let mut checks = Vec::new();

    let mut routes = vec![
        shapley_direct(&g).payoffs,
        shapley_dividends(&g).payoffs,
        harsanyi_allocate(&g, &WeightSystem::egalitarian())?.payoffs,
    ];
    if enumerable {
        routes.push(shapley_permutation(&g)?.payoffs);
        routes.push(weber_allocate(&g, &RandomOrderDistribution::Uniform)?.payoffs);
    }
    let mut spread = 0.0f64;
    for (i, a) in routes.iter().enumerate() {
        for b in &routes[i + 1..] {
            spread = spread.max(max_dev(a, b));
        }
    }
    checks.push(Check { name: "shapley-routes", deviation: spread, tolerance: tol });

    let mut phi = dividends_fast(&g).dividends().to_vec();
    if args.inject_fault == Some(Fault::Dividends) {
        let last = phi.len() - 1;
        phi[last] += 1e-3 * (1.0 + phi[last].abs());
    }
    let table = DividendTable::new(d, phi)?;
    let back = zeta_reconstruct(&table);
    let scale = g.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    checks.push(Check {
        name: "mobius-roundtrip",
        deviation: max_dev(back.values(), g.values()),
        tolerance: 1e-12 * scale,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut order: Vec<usize> = (0..d).collect();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        order.shuffle(&mut rng);
        let m = marginal_vector(&g, &Permutation::new(order.clone())?);
        worst = worst.max((m.iter().sum::<f64>() - g.surplus()).abs());
    }
    checks.push(Check { name: "telescoping", deviation: worst, tolerance: 1e-12 * scale });

    checks.push(Check {
        name: "efficiency-egalitarian",
        deviation: gap(&g, &harsanyi_allocate(&g, &WeightSystem::egalitarian())?),
        tolerance: tol,
    });
    checks.push(Check {
        name: "efficiency-min-owner",
        deviation: gap(&g, &harsanyi_allocate(&g, &WeightSystem::min_owner())?),
        tolerance: tol,
    });
    let uniform = if enumerable {
        weber_allocate(&g, &RandomOrderDistribution::Uniform)?
    } else {
        weber_monte_carlo(&g, &RandomOrderDistribution::Uniform, 2048, args.seed)?
    };
    checks.push(Check { name: "efficiency-uniform", deviation: gap(&g, &uniform), tolerance: tol });

    let mut ok = true;
    for c in &checks {
        let pass = c.deviation <= c.tolerance;
        ok &= pass;
        println!(
            "{} {:<24} deviation {:.3e} (tolerance {:.1e})",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance
        );
    }
    Ok(ok)
}
