//! Variance-decomposition games under Gaussian inputs.
//!
//! The closed game is `v(A) = Var(E[f(X) | X_A])` and the total game is
//! `v'(A) = E[Var(f(X) | X_{D\A})]`; by the law of total variance `v'` is the
//! dual of `v`. Polynomials of degree at most two are handled in closed form,
//! each game by its own formula; anything else goes through a double-loop
//! Monte Carlo estimator.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::gaussian::{Conditioner, GaussianSpec};
use super::model::Model;
use super::quadratic::{quadratic_variance, Quadratic};
use super::tabulate;
use crate::error::{Error, Result};
use crate::game::{Coalition, Game};

/// Sample sizes for the double-loop estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SobolMc {
    /// Outer draws of the conditioning block.
    pub n: usize,
    pub seed: u64,
}

impl SobolMc {
    /// Inner draws per outer draw: `max(64, ⌊√n⌋)`.
    pub fn inner(&self) -> usize {
        ((self.n as f64).sqrt() as usize).max(64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SobolOptions {
    /// Divide every value by `Var f(X)`.
    pub normalize: bool,
    /// Force the Monte Carlo estimator; required for non-quadratic models.
    pub mc: Option<SobolMc>,
    /// Condition on singular covariance blocks through a pseudo-inverse.
    pub pseudo_inverse: bool,
}

impl SobolOptions {
    pub fn normalized() -> Self {
        SobolOptions { normalize: true, ..Default::default() }
    }
}

/// Stream tags keeping the estimators' random numbers apart.
const CLOSED_STREAM: u64 = 0;
const TOTAL_STREAM: u64 = 1 << 32;

/// `v(A) = Var(E[f(X) | X_A])`, optionally divided by `Var f(X)`.
pub fn sobol_closed_game(f: &dyn Model, spec: &GaussianSpec, opts: &SobolOptions) -> Result<Game> {
    sobol_game(f, spec, opts, Kind::Closed)
}

/// `v'(A) = E[Var(f(X) | X_{D\A})]`, optionally divided by `Var f(X)`.
pub fn sobol_total_game(f: &dyn Model, spec: &GaussianSpec, opts: &SobolOptions) -> Result<Game> {
    sobol_game(f, spec, opts, Kind::Total)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Closed,
    Total,
}

fn sobol_game(f: &dyn Model, spec: &GaussianSpec, opts: &SobolOptions, kind: Kind) -> Result<Game> {
    let d = f.dim();
    if spec.dim() != d {
        return Err(Error::Model(format!("model has {d} features, gaussian spec has {}", spec.dim())));
    }
    let full = Coalition::full(d);

    let game = match opts.mc {
        None => {
            let quad = f.polynomial().and_then(Quadratic::from_polynomial).ok_or_else(|| {
                Error::Model("closed-form Sobol values need a polynomial of degree <= 2; pass Monte Carlo sizes".into())
            })?;
            let var_f = closed_variance(&quad, spec, full, opts.pseudo_inverse)?;
            tabulate(d, false, |a| match (kind, a) {
                (_, a) if a.is_empty() => Ok(0.0),
                (_, a) if a == full => Ok(var_f),
                (Kind::Closed, a) => closed_variance(&quad, spec, a, opts.pseudo_inverse),
                (Kind::Total, a) => total_variance(&quad, spec, a, opts.pseudo_inverse),
            })?
        }
        Some(mc) => {
            if mc.n < 2 {
                return Err(Error::SampleCount(mc.n));
            }
            let var_f = mc_closed(f, spec, full, mc, opts.pseudo_inverse)?;
            tabulate(d, f.serial(), |a| match (kind, a) {
                (_, a) if a.is_empty() => Ok(0.0),
                (_, a) if a == full => Ok(var_f),
                (Kind::Closed, a) => mc_closed(f, spec, a, mc, opts.pseudo_inverse),
                (Kind::Total, a) => mc_total(f, spec, a, mc, opts.pseudo_inverse),
            })?
        }
    };

    if !opts.normalize {
        return Ok(game);
    }
    let var_f = game.v_full();
    if var_f <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let values = game.values().iter().enumerate().map(|(m, v)| if m == full.mask() { 1.0 } else { v / var_f }).collect();
    Game::new(d, values)
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    m.select_rows(rows).select_columns(cols)
}

/// `Var(E[f | X_A])`: the conditional expectation is a quadratic in `X_A`.
fn closed_variance(quad: &Quadratic, spec: &GaussianSpec, a: Coalition, pinv: bool) -> Result<f64> {
    let d = spec.dim();
    let cond = Conditioner::new(spec, a, pinv)?;
    let (given, free) = (cond.given(), cond.free());
    // E[X | X_A = z] = L z + h
    let mut l = DMatrix::zeros(d, given.len());
    let mut h = DVector::zeros(d);
    for (k, &i) in given.iter().enumerate() {
        l[(i, k)] = 1.0;
    }
    let intercept = cond.intercept();
    for (r, &i) in free.iter().enumerate() {
        h[i] = intercept[r];
        for k in 0..given.len() {
            l[(i, k)] = cond.gain()[(r, k)];
        }
    }
    let lt = l.transpose();
    let b = &lt * &quad.beta + 2.0 * (&lt * (&quad.q * &h));
    let m = &lt * &quad.q * &l;
    let mu = spec.mean().select_rows(given);
    let sigma = select(spec.cov(), given, given);
    Ok(quadratic_variance(&b, &m, &mu, &sigma))
}

/// `E[Var(f | X_C)]` with `C = D \ A`: the conditional variance is a quadratic in `X_C`.
fn total_variance(quad: &Quadratic, spec: &GaussianSpec, a: Coalition, pinv: bool) -> Result<f64> {
    let d = spec.dim();
    let cond = Conditioner::new(spec, a.complement(d), pinv)?;
    let (ci, ai) = (cond.given(), cond.free());
    let s = cond.cov();
    let q_aa = select(&quad.q, ai, ai);
    let q_ac = select(&quad.q, ai, ci);
    let beta_a = quad.beta.select_rows(ai);
    // gradient of f in X_A, averaged over X_A | X_C = z, is r(z) = r0 + G z
    let r0 = beta_a + 2.0 * (&q_aa * cond.intercept());
    let g = 2.0 * q_ac + 2.0 * (&q_aa * cond.gain());
    let mu_c = spec.mean().select_rows(ci);
    let sigma_c = select(spec.cov(), ci, ci);
    let rbar = &r0 + &g * &mu_c;
    let qs = &q_aa * s;
    let spread = if ci.is_empty() { 0.0 } else { (g.transpose() * s * &g * &sigma_c).trace() };
    Ok(rbar.dot(&(s * &rbar)) + spread + 2.0 * (&qs * &qs).trace())
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_block(mean: &DVector<f64>, factor: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let e = DVector::from_fn(mean.len(), |_, _| StandardNormal.sample(rng));
    (mean + factor * e).as_slice().to_vec()
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn mc_closed(f: &dyn Model, spec: &GaussianSpec, a: Coalition, mc: SobolMc, pinv: bool) -> Result<f64> {
    let d = spec.dim();
    let cond = Conditioner::new(spec, a, pinv)?;
    let marginal = spec.marginal(a);
    let factor = marginal.factor();
    let inner = if cond.free().is_empty() { 1 } else { mc.inner() };
    let mut rng = seeded(mc.seed, CLOSED_STREAM | a.0 as u64);
    let mut point = vec![0.0; d];
    let mut means = Vec::with_capacity(mc.n);
    for _ in 0..mc.n {
        let z = draw_block(marginal.mean(), &factor, &mut rng);
        let mut sum = 0.0;
        for _ in 0..inner {
            cond.sample_full(&z, &mut rng, &mut point);
            sum += f.eval(&point)?;
        }
        means.push(sum / inner as f64);
    }
    Ok(sample_variance(&means))
}

fn mc_total(f: &dyn Model, spec: &GaussianSpec, a: Coalition, mc: SobolMc, pinv: bool) -> Result<f64> {
    let d = spec.dim();
    let given = a.complement(d);
    let cond = Conditioner::new(spec, given, pinv)?;
    let marginal = spec.marginal(given);
    let factor = marginal.factor();
    let inner = mc.inner();
    let mut rng = seeded(mc.seed, TOTAL_STREAM | a.0 as u64);
    let mut point = vec![0.0; d];
    let mut ys = vec![0.0; inner];
    let mut acc = 0.0;
    for _ in 0..mc.n {
        let z = draw_block(marginal.mean(), &factor, &mut rng);
        for y in ys.iter_mut() {
            cond.sample_full(&z, &mut rng, &mut point);
            *y = f.eval(&point)?;
        }
        acc += sample_variance(&ys);
    }
    Ok(acc / mc.n as f64)
}
