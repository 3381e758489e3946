//! Proportional values and proportional marginal effects.

use crate::error::{Error, Result};
use crate::game::{dual_game, Allocation, Coalition, Game};

/// Offsets added to zero-valued dual coalitions, largest first.
pub const PME_EPSILON_LADDER: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Largest per-coordinate change between successive ladder steps accepted as converged.
pub const PME_STEP_TOLERANCE: f64 = 1e-6;

/// Dual values this close to zero count as zero, relative to the largest |w(A)|.
const ZERO_SLACK: f64 = 1e-12;

/// Proportional value of `g`.
///
/// Works on the zero-normalized game `u(A) = v(A) − v(∅)`, which must be
/// strictly positive on every nonempty coalition. Memoizes
/// `φ_i(S) = u(S) / (1 + Σ_{j∈S\{i}} φ_j(S\{i}) / φ_i(S\{j}))` over all subsets,
/// starting from `φ_i({i}) = u({i})`.
pub fn proportional_value(g: &Game) -> Result<Allocation> {
    let v0 = g.v_empty();
    if let Some(m) = (1..g.values().len()).find(|&m| g.values()[m] - v0 <= 0.0) {
        return Err(Error::NonPositive { coalition: Coalition(m as u32), value: g.values()[m] - v0 });
    }
    Ok(Allocation::new("proportional", pv_table(g.players(), |m| g.values()[m] - v0)))
}

/// Runs the memoized recursion; `worth` must be positive on nonempty masks.
fn pv_table(d: usize, worth: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = 1usize << d;
    // row-major: pv[mask * d + player], meaningful only for members
    let mut pv = vec![0.0; n * d];
    for m in 1..n {
        let s = Coalition(m as u32);
        let vs = worth(m);
        if s.len() == 1 {
            pv[m * d + s.players().next().unwrap()] = vs;
            continue;
        }
        for i in s.players() {
            let without_i = s.without(i).mask();
            let mut denom = 1.0;
            for j in s.players().filter(|&j| j != i) {
                let num = pv[without_i * d + j];
                let den = pv[s.without(j).mask() * d + i];
                debug_assert!(den > 0.0, "positive games keep every share positive");
                denom += num / den;
            }
            pv[m * d + i] = vs / denom;
        }
    }
    pv[(n - 1) * d..].to_vec()
}

/// Proportional marginal effects: the proportional value of the dual game.
///
/// Dual coalitions worth exactly zero make the proportional value undefined;
/// they are handled by adding ε to every nonempty dual coalition, walking ε
/// down [`PME_EPSILON_LADDER`] until two successive results agree within
/// [`PME_STEP_TOLERANCE`], extrapolating linearly to ε = 0 and rescaling the
/// result onto `w(D)`.
pub fn pme(g: &Game) -> Result<Allocation> {
    let w = dual_game(g);
    let d = w.players();
    let scale = w.values().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let slack = ZERO_SLACK * scale;

    let mut has_zero = false;
    for m in 1..w.values().len() {
        let value = w.values()[m];
        if value < -slack {
            return Err(Error::NegativeDual { coalition: Coalition(m as u32), value });
        }
        has_zero |= value <= slack;
    }
    if !has_zero {
        let mut a = proportional_value(&w)?;
        a.method = "pme".into();
        return Ok(a);
    }

    let shifted = |eps: f64| pv_table(d, |m| w.values()[m].max(0.0) + eps);
    let mut prev_eps = PME_EPSILON_LADDER[0];
    let mut prev = shifted(prev_eps);
    let mut change = f64::INFINITY;
    for &eps in &PME_EPSILON_LADDER[1..] {
        let cur = shifted(eps);
        change = prev.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change <= PME_STEP_TOLERANCE {
            let t = eps / (prev_eps - eps);
            let mut phi: Vec<f64> = cur.iter().zip(&prev).map(|(c, p)| (c - t * (p - c)).max(0.0)).collect();
            let total: f64 = phi.iter().sum();
            let target = w.surplus();
            if total > 0.0 {
                phi.iter_mut().for_each(|x| *x *= target / total);
            }
            return Ok(Allocation::new("pme", phi));
        }
        prev = cur;
        prev_eps = eps;
    }
    Err(Error::NoConvergence { change })
}
