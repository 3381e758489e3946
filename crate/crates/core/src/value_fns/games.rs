//! Prediction-decomposition games: the value of a coalition is the expected
//! prediction once the coalition's features are pinned to the instance.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gaussian::{Conditioner, GaussianSpec};
use super::model::{Dataset, Model};
use super::quadratic::Quadratic;
use super::tabulate;
use crate::error::{Error, Result};
use crate::game::{Coalition, Game};

fn check_dims(f: &dyn Model, d: usize, what: &str) -> Result<()> {
    if f.dim() != d {
        return Err(Error::Model(format!("model has {} features, {what} has {d}", f.dim())));
    }
    Ok(())
}

/// Interventional game `v(A) = (1/n) Σ_rows f(x_A, row_{D\A})`.
///
/// `v(D) = f(x)` and `v(∅)` is the mean background prediction.
pub fn marginal_game(f: &dyn Model, data: &Dataset, x: &[f64]) -> Result<Game> {
    let d = f.dim();
    check_dims(f, data.dim(), "dataset")?;
    check_dims(f, x.len(), "instance")?;
    let full = Coalition::full(d);
    tabulate(d, f.serial(), |a| {
        if a == full {
            return f.eval(x);
        }
        let mut point = vec![0.0; d];
        let mut sum = 0.0;
        for row in data.rows() {
            for i in 0..d {
                point[i] = if a.contains(i) { x[i] } else { row[i] };
            }
            sum += f.eval(&point)?;
        }
        Ok(sum / data.len() as f64)
    })
}

fn quadratic_of(f: &dyn Model) -> Result<Quadratic> {
    f.polynomial()
        .and_then(Quadratic::from_polynomial)
        .ok_or_else(|| Error::Model("closed form needs a polynomial of degree <= 2; use conditional_mc_game".into()))
}

/// Observational game `v(A) = E[f(X) | X_A = x_A]` under Gaussian features,
/// in closed form for polynomial models of degree at most two.
pub fn conditional_gaussian_game(f: &dyn Model, spec: &GaussianSpec, x: &[f64]) -> Result<Game> {
    conditional_gaussian_game_with(f, spec, x, false)
}

/// [`conditional_gaussian_game`] with optional pseudo-inverse conditioning
/// for singular covariance blocks.
pub fn conditional_gaussian_game_with(f: &dyn Model, spec: &GaussianSpec, x: &[f64], pseudo_inverse: bool) -> Result<Game> {
    let d = f.dim();
    check_dims(f, spec.dim(), "gaussian spec")?;
    check_dims(f, x.len(), "instance")?;
    let quad = quadratic_of(f)?;
    let full = Coalition::full(d);
    tabulate(d, false, |a| {
        if a == full {
            return f.eval(x);
        }
        let cond = Conditioner::new(spec, a, pseudo_inverse)?;
        let z: Vec<f64> = cond.given().iter().map(|&i| x[i]).collect();
        let free_mean = cond.mean(&z);
        let mut mean = DVector::from_row_slice(x);
        let mut cov = DMatrix::zeros(d, d);
        for (r, &i) in cond.free().iter().enumerate() {
            mean[i] = free_mean[r];
            for (s, &j) in cond.free().iter().enumerate() {
                cov[(i, j)] = cond.cov()[(r, s)];
            }
        }
        Ok(quad.expectation(&mean, &cov))
    })
}

/// Monte Carlo estimate of the observational game for arbitrary models.
///
/// Every coalition gets its own random stream derived from `seed`, so the
/// table does not depend on evaluation order. `v(D)` is exactly `f(x)`.
pub fn conditional_mc_game(f: &dyn Model, spec: &GaussianSpec, x: &[f64], n: usize, seed: u64) -> Result<Game> {
    Ok(conditional_mc_game_detailed(f, spec, x, n, seed)?.0)
}

/// Like [`conditional_mc_game`], also returning the standard error of each coalition value.
pub fn conditional_mc_game_detailed(
    f: &dyn Model,
    spec: &GaussianSpec,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<(Game, Vec<f64>)> {
    if n < 2 {
        return Err(Error::SampleCount(n));
    }
    let d = f.dim();
    check_dims(f, spec.dim(), "gaussian spec")?;
    check_dims(f, x.len(), "instance")?;
    let full = Coalition::full(d);
    let stderr = std::sync::Mutex::new(vec![0.0; 1 << d]);
    let game = tabulate(d, f.serial(), |a| {
        if a == full {
            return f.eval(x);
        }
        let cond = Conditioner::new(spec, a, false)?;
        let z: Vec<f64> = cond.given().iter().map(|&i| x[i]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(a.0 as u64);
        let mut point = vec![0.0; d];
        let (mut mean, mut m2) = (0.0, 0.0);
        for k in 1..=n {
            cond.sample_full(&z, &mut rng, &mut point);
            let y = f.eval(&point)?;
            let delta = y - mean;
            mean += delta / k as f64;
            m2 += delta * (y - mean);
        }
        stderr.lock().unwrap()[a.mask()] = (m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt();
        Ok(mean)
    })?;
    Ok((game, stderr.into_inner().unwrap()))
}
