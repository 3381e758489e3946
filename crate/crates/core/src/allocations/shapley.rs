use crate::dividends::dividends_fast;
use crate::game::{Allocation, Coalition, Game};

/// `k!(d−1−k)!/d!`, the Shapley weight of a coalition of size `k` not containing the player.
fn coalition_weights(d: usize) -> Vec<f64> {
    // Pascal row d−1 in integers; exact for every supported d.
    let mut row = vec![1u64; d];
    for n in 1..d {
        for k in (1..n).rev() {
            row[k] += row[k - 1];
        }
    }
    row.iter().map(|&binom| 1.0 / (d as f64 * binom as f64)).collect()
}

/// Shapley values from the coalition formula
/// `Shap(j) = (1/d) Σ_{A∌j} C(d−1,|A|)^{-1} [v(A∪{j}) − v(A)]`.
pub fn shapley_direct(g: &Game) -> Allocation {
    let d = g.players();
    let w = coalition_weights(d);
    let v = g.values();
    let mut phi = vec![0.0; d];
    for m in 0..v.len() {
        let a = Coalition(m as u32);
        let wk = w.get(a.len()).copied().unwrap_or(0.0);
        for j in a.complement(d).players() {
            phi[j] += wk * (v[a.with(j).mask()] - v[m]);
        }
    }
    Allocation::new("shapley", phi)
}

/// Shapley values as the equal split of every dividend among its members.
pub fn shapley_dividends(g: &Game) -> Allocation {
    let t = dividends_fast(g);
    let mut phi = vec![0.0; g.players()];
    for (m, &div) in t.dividends().iter().enumerate().skip(1) {
        let a = Coalition(m as u32);
        let share = div / a.len() as f64;
        for j in a.players() {
            phi[j] += share;
        }
    }
    Allocation::new("shapley-dividends", phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, unanimity};
    use crate::game::dual_game;

    #[test]
    fn weights_are_exact() {
        assert_eq!(coalition_weights(1), vec![1.0]);
        assert_eq!(coalition_weights(3), vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0]);
        let w = coalition_weights(20);
        assert_eq!(w[10], 1.0 / (20.0 * 92378.0));
    }

    #[test]
    fn g2() {
        assert_eq!(shapley_direct(&fixtures::g2()).payoffs, vec![1.5, 2.5]);
        assert_eq!(shapley_dividends(&fixtures::g2()).payoffs, vec![1.5, 2.5]);
    }

    #[test]
    fn unanimity_split() {
        assert_eq!(shapley_direct(&unanimity(2, Coalition(3))).payoffs, vec![0.5, 0.5]);
        let g = unanimity(5, Coalition(0b10110));
        let expected = [0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0];
        for a in [shapley_direct(&g), shapley_dividends(&g)] {
            assert!(a.max_abs_diff(&expected) < 1e-15);
        }
    }

    #[test]
    fn sobol_dual_fixture() {
        let rho: f64 = 0.5;
        let a = shapley_direct(&dual_game(&fixtures::g3_rho(rho)));
        let expected = [0.5 * (1.0 - rho * rho / 2.0), 0.5, rho * rho / 4.0];
        assert_eq!(expected, [0.4375, 0.5, 0.0625]);
        assert!(a.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn routes_agree_on_random_games() {
        let g = fixtures::random_game_seeded(6, 42);
        let a = shapley_direct(&g);
        let b = shapley_dividends(&g);
        assert!(a.max_abs_diff(&b.payoffs) <= 1e-12);
    }

    #[test]
    fn self_dual_and_efficient() {
        for seed in 0..20 {
            let g = fixtures::random_game_seeded(1 + seed as usize % 6, seed);
            let a = shapley_direct(&g);
            let b = shapley_direct(&dual_game(&g));
            assert!(a.max_abs_diff(&b.payoffs) <= 1e-10);
            assert!((a.total() - g.surplus()).abs() <= 1e-10);
        }
    }
}
