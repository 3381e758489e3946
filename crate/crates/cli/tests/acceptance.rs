//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coalition_core::allocations::{
    harsanyi_allocate, marginal_vector, pme, shapley_direct, shapley_dividends, shapley_permutation, weber_allocate,
    weber_monte_carlo, weber_monte_carlo_with, ExplicitPmf, McOptions, Permutation, RandomOrderDistribution,
    WeightPreset, WeightSystem,
};
use coalition_core::dividends::{dividends_fast, dividends_recursive, zeta_reconstruct};
use coalition_core::expr::parse;
use coalition_core::fixtures::{additive, g2, g3_rho, random_game, unanimity};
use coalition_core::value_fns::{
    conditional_gaussian_game, sobol_closed_game, sobol_total_game, ExprModel, GaussianSpec, SobolOptions,
};
use coalition_core::{dual_game, efficiency_gap, Coalition, Game};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scale(g: &Game) -> f64 {
    g.values().iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn within(what: &str, dev: f64, tol: f64) -> Result<(), String> {
    if dev <= tol {
        Ok(())
    } else {
        Err(format!("{what}: deviation {dev:e} > {tol:e}"))
    }
}

fn timed(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t < limit {
        Ok(t)
    } else {
        Err(format!("took {t:?}, limit {limit:?}"))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = ExprModel::parse("x1 + x2 + x1*x2", 2).map_err(|e| e.to_string())?;
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut worst = 0.0f64;
    for rho in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let spec = GaussianSpec::standard(vec![vec![1.0, rho], vec![rho, 1.0]]).map_err(|e| e.to_string())?;
        for x1 in grid {
            for x2 in grid {
                let g = conditional_gaussian_game(&f, &spec, &[x1, x2]).map_err(|e| e.to_string())?;
                let expected = [
                    x1 + rho / 2.0 * (x1 + x1 * x1 - x2 - x2 * x2 - 1.0) + x1 * x2 / 2.0,
                    x2 + rho / 2.0 * (x2 + x2 * x2 - x1 - x1 * x1 - 1.0) + x1 * x2 / 2.0,
                ];
                worst = worst.max(max_dev(&shapley_direct(&g).payoffs, &expected));
            }
        }
    }
    within("conditional-expectation Shapley", worst, 1e-8)?;
    let t = timed(Duration::from_secs(1), start)?;
    Ok(format!("125 points, max deviation {worst:.2e}, {t:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let f = ExprModel::parse("x1 + x2", 3).map_err(|e| e.to_string())?;
    let opts = SobolOptions::normalized();
    let (mut shap_dev, mut pme_dev) = (0.0f64, 0.0f64);
    for rho in [0.0, 0.3, 0.5, 0.9] {
        let spec = GaussianSpec::standard(vec![vec![1.0, 0.0, rho], vec![0.0, 1.0, 0.0], vec![rho, 0.0, 1.0]])
            .map_err(|e| e.to_string())?;
        let closed = sobol_closed_game(&f, &spec, &opts).map_err(|e| e.to_string())?;
        let total = sobol_total_game(&f, &spec, &opts).map_err(|e| e.to_string())?;
        within("closed Sobol game vs fixture", max_dev(closed.values(), g3_rho(rho).values()), 1e-12)?;
        let expected = [0.5 * (1.0 - rho * rho / 2.0), 0.5, rho * rho / 4.0];
        shap_dev = shap_dev.max(max_dev(&shapley_direct(&total).payoffs, &expected));
        let p = pme(&closed).map_err(|e| e.to_string())?;
        pme_dev = pme_dev.max(max_dev(&p.payoffs, &[0.5, 0.5, 0.0]));
    }
    within("dual Sobol Shapley", shap_dev, 1e-8)?;
    within("PME", pme_dev, 1e-4)?;
    let t = timed(Duration::from_secs(5), start)?;
    Ok(format!("Shapley max deviation {shap_dev:.2e}, PME max deviation {pme_dev:.2e}, {t:.2?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for d in 1..=8 {
        for k in 0..50u64 {
            let g = random_game(d, &mut ChaCha8Rng::seed_from_u64(1000 * d as u64 + k));
            let routes = [
                shapley_direct(&g).payoffs,
                shapley_permutation(&g).map_err(|e| e.to_string())?.payoffs,
                shapley_dividends(&g).payoffs,
                harsanyi_allocate(&g, &WeightSystem::egalitarian()).map_err(|e| e.to_string())?.payoffs,
                weber_allocate(&g, &RandomOrderDistribution::Uniform).map_err(|e| e.to_string())?.payoffs,
            ];
            for (i, a) in routes.iter().enumerate() {
                for b in &routes[i + 1..] {
                    worst = worst.max(max_dev(a, b));
                }
            }
        }
    }
    within("pairwise Shapley routes", worst, 1e-10)?;
    let t = timed(Duration::from_secs(30), start)?;
    Ok(format!("400 games, five routes, max pairwise deviation {worst:.2e}, {t:.2?}"))
}

fn random_pmf(d: usize, rng: &mut ChaCha8Rng) -> ExplicitPmf {
    let support = rng.random_range(1..=6);
    let mut entries: Vec<(Permutation, f64)> = Vec::new();
    for _ in 0..support {
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(rng);
        let perm = Permutation::new(order).unwrap();
        if entries.iter().all(|(p, _)| *p != perm) {
            entries.push((perm, rng.random_range(0.0..1.0)));
        }
    }
    let total: f64 = entries.iter().map(|e| e.1).sum();
    if total > 0.0 {
        entries.iter_mut().for_each(|e| e.1 /= total);
    } else {
        let n = entries.len() as f64;
        entries.iter_mut().for_each(|e| e.1 = 1.0 / n);
    }
    ExplicitPmf::new(entries).unwrap()
}

/// A valid weight system: random rows over a random preset, with some rows
/// concentrated on a single member.
fn random_weights(d: usize, rng: &mut ChaCha8Rng) -> WeightSystem {
    let preset = [WeightPreset::Egalitarian, WeightPreset::MinOwner, WeightPreset::Custom][rng.random_range(0..3)];
    let mut ws = WeightSystem::preset(preset);
    for m in 1..1u32 << d {
        let c = Coalition(m);
        if preset != WeightPreset::Custom && rng.random_bool(0.5) {
            continue;
        }
        let members: Vec<usize> = c.players().collect();
        if rng.random_bool(0.2) {
            ws.set(members[rng.random_range(0..members.len())], c, 1.0);
            continue;
        }
        let raw: Vec<f64> = members.iter().map(|_| rng.random_range(0.0..1.0) + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        for (&i, w) in members.iter().zip(&raw) {
            ws.set(i, c, w / total);
        }
    }
    ws
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut nonzero_empty) = (0.0f64, 0);
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let mut g = random_game(d, &mut rng);
        if rng.random_bool(0.2) {
            // force a large offset on the empty coalition as well
            let shift = rng.random_range(-50.0..50.0);
            g = Game::new(d, g.values().iter().map(|v| v + shift).collect()).unwrap();
        }
        nonzero_empty += usize::from(g.v_empty() != 0.0);
        let tol = 1e-10;
        let w = random_pmf(d, &mut rng);
        let a = weber_allocate(&g, &RandomOrderDistribution::Explicit(w)).map_err(|e| e.to_string())?;
        let gap = efficiency_gap(&g, &a).unwrap().abs();
        within("Weber with explicit pmf", gap, tol)?;
        worst = worst.max(gap);
        let ws = random_weights(d, &mut rng);
        ws.validate(d).map_err(|e| e.to_string())?;
        let a = harsanyi_allocate(&g, &ws).map_err(|e| e.to_string())?;
        let gap = efficiency_gap(&g, &a).unwrap().abs();
        within("Harsanyi with weight system", gap, tol)?;
        worst = worst.max(gap);
    }
    Ok(format!("200 pmf pairs and 200 weight-system pairs ({nonzero_empty} with v(∅) ≠ 0), max |gap| {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let (mut roundtrip, mut checksum, mut agree) = (0.0f64, 0.0f64, 0.0f64);
    for d in 1..=12 {
        for k in 0..3u64 {
            let g = random_game(d, &mut ChaCha8Rng::seed_from_u64(500 + 10 * d as u64 + k));
            let s = scale(&g);
            let t = dividends_fast(&g);
            roundtrip = roundtrip.max(max_dev(zeta_reconstruct(&t).values(), g.values()) / s);
            checksum = checksum.max((t.total() - g.v_full()).abs() / s);
            if d <= 10 {
                agree = agree.max(max_dev(t.dividends(), dividends_recursive(&g).dividends()) / s);
            }
        }
    }
    within("zeta(mobius(v)) = v", roundtrip, 1e-12)?;
    within("sum of dividends = v(D)", checksum, 1e-12)?;
    within("fast = recursive dividends", agree, 1e-12)?;
    Ok(format!("round-trip {roundtrip:.2e}, checksum {checksum:.2e}, fast vs recursive {agree:.2e}"))
}

fn all_orders(d: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let p = rest.remove(k);
            prefix.push(p);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, p);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..d).collect(), &mut out);
    out
}

fn criterion_6() -> Outcome {
    let (mut worst, mut count) = (0.0f64, 0usize);
    for d in 1..=6 {
        let g = random_game(d, &mut ChaCha8Rng::seed_from_u64(600 + d as u64));
        for order in all_orders(d) {
            let m = marginal_vector(&g, &Permutation::new(order).unwrap());
            worst = worst.max((m.iter().sum::<f64>() - g.surplus()).abs());
            count += 1;
        }
    }
    within("telescoping", worst, 1e-12)?;
    Ok(format!("{count} orderings, max deviation {worst:.2e}"))
}

fn random_quadratic_model(d: usize, rng: &mut ChaCha8Rng) -> String {
    let mut terms = vec![format!("{:?}", rng.random_range(-1.0..1.0))];
    for i in 1..=d {
        terms.push(format!("{:?}*x{i}", rng.random_range(-2.0..2.0)));
        for j in i..=d {
            if rng.random_bool(0.6) {
                terms.push(format!("{:?}*x{i}*x{j}", rng.random_range(-1.0..1.0)));
            }
        }
    }
    terms.join(" + ")
}

fn random_gaussian(d: usize, rng: &mut ChaCha8Rng) -> GaussianSpec {
    let a: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let cov = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.2 } else { 0.0 })
                .collect()
        })
        .collect();
    let mean = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    GaussianSpec::new(mean, cov).unwrap()
}

fn criterion_7() -> Outcome {
    let mut self_dual = 0.0f64;
    for d in 1..=6 {
        for k in 0..20u64 {
            let g = random_game(d, &mut ChaCha8Rng::seed_from_u64(700 + 100 * d as u64 + k));
            self_dual = self_dual.max(max_dev(&shapley_direct(&g).payoffs, &shapley_direct(&dual_game(&g)).payoffs));
        }
    }
    within("Shapley self-duality", self_dual, 1e-10)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sobol = 0.0f64;
    for d in 1..=5 {
        for _ in 0..4 {
            let f = ExprModel::parse(&random_quadratic_model(d, &mut rng), d).map_err(|e| e.to_string())?;
            let spec = random_gaussian(d, &mut rng);
            for normalize in [false, true] {
                let opts = SobolOptions { normalize, ..Default::default() };
                let closed = sobol_closed_game(&f, &spec, &opts).map_err(|e| e.to_string())?;
                let total = sobol_total_game(&f, &spec, &opts).map_err(|e| e.to_string())?;
                sobol = sobol.max(max_dev(total.values(), dual_game(&closed).values()) / scale(&closed));
            }
        }
    }
    within("total Sobol = dual of closed Sobol", sobol, 1e-10)?;
    Ok(format!("self-duality {self_dual:.2e}, Sobol duality {sobol:.2e}"))
}

fn criterion_8() -> Outcome {
    let d6 = random_game(6, &mut ChaCha8Rng::seed_from_u64(8));
    let mut summary = Vec::new();
    for (name, g) in [("G2", g2()), ("d=6", d6)] {
        let exact = shapley_direct(&g).payoffs;
        let mut covered = 0;
        for seed in 0..100u64 {
            let a = weber_monte_carlo(&g, &RandomOrderDistribution::Uniform, 10_000, seed).map_err(|e| e.to_string())?;
            let se = a.stderr.as_ref().ok_or("missing stderr")?;
            if a.payoffs.iter().zip(&exact).zip(se).all(|((p, e), s)| (p - e).abs() <= 3.0 * s) {
                covered += 1;
            }
        }
        if covered < 95 {
            return Err(format!("{name}: only {covered}/100 trials within 3 stderr"));
        }
        for seed in [1u64, 99] {
            let serial = McOptions { parallel: false, ..Default::default() };
            let parallel = McOptions { parallel: true, ..Default::default() };
            let a = weber_monte_carlo_with(&g, &RandomOrderDistribution::Uniform, 10_000, seed, serial)
                .map_err(|e| e.to_string())?;
            let b = weber_monte_carlo_with(&g, &RandomOrderDistribution::Uniform, 10_000, seed, parallel)
                .map_err(|e| e.to_string())?;
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            if bits(&a.payoffs) != bits(&b.payoffs) || bits(a.stderr.as_ref().unwrap()) != bits(b.stderr.as_ref().unwrap())
            {
                return Err(format!("{name}: serial and parallel runs differ for seed {seed}"));
            }
        }
        summary.push(format!("{name} {covered}/100"));
    }
    Ok(format!("coverage {}, serial = parallel bitwise", summary.join(", ")))
}

const HAND_CORPUS: [&str; 20] = [
    "x1",
    "-x1",
    "--x1",
    "3",
    "2.5e-3 * x2",
    "x1 + x2 + x1*x2",
    "x1 - x2 - x3",
    "x1 / x2 / x3",
    "x1 ^ 2 ^ 2",
    "-x1 ^ 2",
    "(x1 + 1) ^ 3",
    "x1 ^ (1 + 1)",
    "1e3 - .5",
    "((x1))",
    "x3 * (x2 - (x1 / 4))",
    "2 ^ 10",
    "x1 * -x2",
    "0.1 + 0.2",
    "x1^0",
    "(x1 - x2) / (x1 + x2 + 10)",
];

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..3) {
            0 => format!("x{}", rng.random_range(1..=3)),
            1 => format!("{}", rng.random_range(0..100)),
            _ => format!("{:.3}", rng.random_range(0.0..10.0)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.random_range(0..7) {
        0 => format!("-{a}"),
        1 => format!("({a})^{}", rng.random_range(0..4)),
        2 => format!("({a})"),
        k => {
            let op = ["+", "-", "*", "/"][k - 3];
            format!("{a} {op} {}", random_expr(rng, depth - 1))
        }
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut corpus: Vec<String> = HAND_CORPUS.iter().map(|s| s.to_string()).collect();
    while corpus.len() < 100 {
        corpus.push(random_expr(&mut rng, 5));
    }
    let mut worst = 0.0f64;
    for src in &corpus {
        let e = parse(src, 3).map_err(|err| format!("{src:?}: {err}"))?;
        let printed = e.to_string();
        let again = parse(&printed, 3).map_err(|err| format!("reparse of {printed:?}: {err}"))?;
        for _ in 0..5 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            match (e.eval(&x), again.eval(&x)) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / a.abs().max(1.0)),
                (Err(a), Err(b)) if a == b => {}
                (a, b) => return Err(format!("{src:?} evaluates to {a:?} but its print to {b:?}")),
            }
        }
    }
    within("parse-print-parse evaluation", worst, 1e-12)?;

    let alphabet = b"x0123456789.e+-*/^() \t1x2x3";
    let mut errors = 0;
    for k in 0..100_000 {
        let len = rng.random_range(0..24);
        let bytes: Vec<u8> = if k % 2 == 0 {
            (0..len).map(|_| (rng.next_u32() & 0xff) as u8).collect()
        } else {
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        };
        let src = String::from_utf8_lossy(&bytes);
        let res = catch_unwind(AssertUnwindSafe(|| parse(&src, 3)));
        match res {
            Err(_) => return Err(format!("parser panicked on {src:?}")),
            Ok(Err(e)) => {
                if e.offset > src.len() {
                    return Err(format!("error offset {} beyond input {src:?}", e.offset));
                }
                errors += 1;
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!("100-case corpus max deviation {worst:.2e}; 100000 fuzz inputs, {errors} positioned errors, no panics"))
}

fn write_game(dir: &Path, name: &str, g: &Game) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(g).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn exit_code(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_coalition-attr"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| format!("{args:?} killed by signal"))
}

fn expect_code(args: &[&str], code: i32) -> Result<(), String> {
    let got = exit_code(args)?;
    if got == code {
        Ok(())
    } else {
        Err(format!("{args:?} exited {got}, expected {code}"))
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    expect_code(&["paper-bench"], 0)?;

    let mut fixtures = vec![
        write_game(p, "g2.json", &g2()),
        write_game(p, "d1.json", &Game::new(1, vec![0.3, 1.7]).unwrap()),
        write_game(p, "u12.json", &unanimity(3, Coalition(3))),
        write_game(p, "additive.json", &additive(&[1.0, -2.0, 0.5, 3.0])),
        write_game(p, "random9.json", &random_game(9, &mut ChaCha8Rng::seed_from_u64(10))),
    ];
    for rho in [0.0, 0.3, 0.5, 0.9] {
        fixtures.push(write_game(p, &format!("g3_{rho}.json"), &g3_rho(rho)));
    }
    for f in &fixtures {
        expect_code(&["verify", f], 0)?;
    }

    let g2p = &fixtures[0];
    let bad = p.join("bad.json");
    std::fs::write(&bad, "{\"d\": 2, \"values\": [0, 1").unwrap();
    let short = p.join("short.json");
    std::fs::write(&short, "{\"d\": 2, \"values\": [0, 1, 2]}").unwrap();
    let zero = write_game(p, "zero.json", &Game::new(2, vec![0.0, 0.0, 2.0, 4.0]).unwrap());
    let (bad, short) = (bad.to_str().unwrap(), short.to_str().unwrap());
    let missing = p.join("missing.json");
    let missing = missing.to_str().unwrap();

    let cases: [(&[&str], i32); 12] = [
        (&["attribute", "--game", g2p, "--method", "weber-mc", "--n", "100"], 2),
        (&["attribute", "--game", g2p, "--model", "x1", "--method", "shapley"], 2),
        (&["attribute", "--method", "shapley"], 2),
        (&["attribute", "--game", g2p, "--method", "shapley", "--weights", g2p], 2),
        (&["attribute", "--game", g2p, "--method", "no-such-method"], 2),
        (&["attribute", "--game", bad, "--method", "shapley"], 3),
        (&["attribute", "--game", short, "--method", "shapley"], 3),
        (&["attribute", "--game", missing, "--method", "shapley"], 3),
        (&["dividends", bad], 3),
        (&["attribute", "--game", &zero, "--method", "proportional"], 4),
        (&["verify", g2p, "--inject-fault", "dividends"], 1),
        (&["paper-bench", "--inject-fault", "shift"], 1),
    ];
    for (args, code) in cases {
        expect_code(args, code)?;
    }
    Ok(format!("paper-bench exit 0, verify exit 0 on {} fixtures, 12 fault cases matched", fixtures.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "conditional-expectation Shapley formulas", criterion_1),
        (2, "spurious-feature Shapley and PME", criterion_2),
        (3, "cross-route Shapley", criterion_3),
        (4, "efficiency of Weber and Harsanyi allocations", criterion_4),
        (5, "Mobius/zeta transforms", criterion_5),
        (6, "telescoping marginal vectors", criterion_6),
        (7, "self-duality and Sobol duality", criterion_7),
        (8, "Monte Carlo calibration and determinism", criterion_8),
        (9, "expression parser round-trip and fuzzing", criterion_9),
        (10, "CLI end to end", criterion_10),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        let outcome = catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2} {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
