//! Harsanyi-set allocations: dividends shared among coalition members.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::dividends::dividends_fast;
use crate::error::{Error, Result};
use crate::game::{Allocation, Coalition, Game};

const ROW_TOLERANCE: f64 = 1e-9;

/// Rule used for coalitions without explicit entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPreset {
    /// `λ_j(A) = 1/|A|`.
    Egalitarian,
    /// Whole dividend to the lowest-indexed member.
    MinOwner,
    /// No default: every nonempty coalition needs explicit entries.
    Custom,
}

/// Sharing weights `λ_j(A)`, stored sparsely on top of a preset.
///
/// A coalition with at least one explicit entry is governed entirely by its
/// entries (missing members get 0); any other coalition follows the preset.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    preset: WeightPreset,
    entries: BTreeMap<(Coalition, usize), f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsRepr {
    preset: Option<WeightPreset>,
    #[serde(default)]
    entries: Vec<EntryRepr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRepr {
    player: usize,
    coalition: u32,
    w: f64,
}

impl WeightSystem {
    pub fn preset(preset: WeightPreset) -> Self {
        WeightSystem { preset, entries: BTreeMap::new() }
    }

    pub fn egalitarian() -> Self {
        Self::preset(WeightPreset::Egalitarian)
    }

    pub fn min_owner() -> Self {
        Self::preset(WeightPreset::MinOwner)
    }

    /// Sets `λ_player(coalition)`; `player` is 0-based.
    pub fn set(&mut self, player: usize, coalition: Coalition, weight: f64) -> &mut Self {
        self.entries.insert((coalition, player), weight);
        self
    }

    /// Parses `{"preset": …}` and/or `{"entries": [{"player": 1, "coalition": 5, "w": 0.25}]}`.
    ///
    /// Players are 1-based; a file with entries and no preset is `custom`.
    pub fn from_json(src: &str) -> std::result::Result<Self, String> {
        let raw: WeightsRepr = serde_json::from_str(src).map_err(|e| e.to_string())?;
        let preset = raw.preset.unwrap_or(if raw.entries.is_empty() { WeightPreset::Egalitarian } else { WeightPreset::Custom });
        let mut ws = WeightSystem::preset(preset);
        for e in raw.entries {
            if e.player == 0 {
                return Err("players are 1-based; found 0".into());
            }
            ws.set(e.player - 1, Coalition(e.coalition), e.w);
        }
        Ok(ws)
    }

    pub fn preset_kind(&self) -> WeightPreset {
        self.preset
    }

    /// Weights of the members of a nonempty coalition as `(player, λ)` pairs.
    fn row(&self, a: Coalition) -> Vec<(usize, f64)> {
        let explicit: Vec<(usize, f64)> = self
            .entries
            .range((a, 0)..=(a, usize::MAX))
            .map(|(&(_, j), &w)| (j, w))
            .collect();
        if !explicit.is_empty() {
            return explicit;
        }
        match self.preset {
            WeightPreset::Egalitarian => {
                let share = 1.0 / a.len() as f64;
                a.players().map(|j| (j, share)).collect()
            }
            WeightPreset::MinOwner => vec![(a.players().next().expect("nonempty coalition"), 1.0)],
            WeightPreset::Custom => Vec::new(),
        }
    }

    /// All constraint violations for a game of `d` players, lowest mask first.
    pub fn violations(&self, d: usize) -> Vec<Error> {
        let full = Coalition::full(d);
        let mut out = Vec::new();
        let fail = |coalition, reason: String| Error::WeightSystem { coalition, reason };
        for &(a, j) in self.entries.keys() {
            if !a.is_subset_of(full) || j >= d {
                out.push(fail(a, format!("entry for player {} lies outside a {d}-player game", j + 1)));
            }
        }
        for m in 1..1u32 << d {
            let a = Coalition(m);
            let row = self.row(a);
            if let Some(&(j, _)) = row.iter().find(|(j, _)| !a.contains(*j)) {
                out.push(fail(a, format!("player {} is not a member but has a weight", j + 1)));
                continue;
            }
            if let Some(&(j, w)) = row.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
                out.push(fail(a, format!("weight {w} of player {} is negative or not finite", j + 1)));
                continue;
            }
            let sum: f64 = row.iter().map(|(_, w)| w).sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                out.push(fail(a, format!("member weights sum to {sum}, not 1")));
            }
        }
        out.sort_by_key(|e| match e {
            Error::WeightSystem { coalition, .. } => *coalition,
            _ => Coalition::EMPTY,
        });
        out
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self.violations(d).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Harsanyi allocation `φ(j) = Σ_{A∋j} λ_j(A) φ_v(A)`.
///
/// The dividend of ∅ is never shared out.
pub fn harsanyi_allocate(g: &Game, weights: &WeightSystem) -> Result<Allocation> {
    let d = g.players();
    weights.validate(d)?;
    let t = dividends_fast(g);
    let mut phi = vec![0.0; d];
    for m in 1..1u32 << d {
        let a = Coalition(m);
        let div = t.get(a);
        for (j, w) in weights.row(a) {
            phi[j] += w * div;
        }
    }
    let method = match weights.preset {
        WeightPreset::Egalitarian if weights.entries.is_empty() => "harsanyi-egalitarian",
        WeightPreset::MinOwner if weights.entries.is_empty() => "harsanyi-min-owner",
        _ => "harsanyi",
    };
    Ok(Allocation::new(method, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocations::shapley::shapley_direct;
    use crate::fixtures;
    use crate::game::efficiency_gap;

    #[test]
    fn g2_presets() {
        let g = fixtures::g2();
        assert_eq!(harsanyi_allocate(&g, &WeightSystem::egalitarian()).unwrap().payoffs, vec![1.5, 2.5]);
        assert_eq!(harsanyi_allocate(&g, &WeightSystem::min_owner()).unwrap().payoffs, vec![2.0, 2.0]);
    }

    #[test]
    fn egalitarian_is_shapley() {
        let g = fixtures::random_game_seeded(7, 4);
        let a = harsanyi_allocate(&g, &WeightSystem::egalitarian()).unwrap();
        assert!(a.max_abs_diff(&shapley_direct(&g).payoffs) <= 1e-12);
    }

    #[test]
    fn row_sum_violation_names_coalition() {
        let mut ws = WeightSystem::egalitarian();
        ws.set(0, Coalition(3), 0.45).set(1, Coalition(3), 0.45);
        let err = harsanyi_allocate(&fixtures::g2(), &ws).unwrap_err();
        assert!(matches!(err, Error::WeightSystem { coalition: Coalition(3), .. }), "{err}");
    }

    #[test]
    fn other_violations() {
        let mut neg = WeightSystem::egalitarian();
        neg.set(0, Coalition(3), 1.5).set(1, Coalition(3), -0.5);
        assert!(neg.validate(2).is_err());

        let mut outside = WeightSystem::egalitarian();
        outside.set(1, Coalition(1), 1.0);
        assert!(matches!(outside.validate(2), Err(Error::WeightSystem { coalition: Coalition(1), .. })));

        let mut custom = WeightSystem::preset(WeightPreset::Custom);
        custom.set(0, Coalition(1), 1.0).set(1, Coalition(2), 1.0);
        let v = custom.violations(2);
        assert_eq!(v.len(), 1);
        custom.set(0, Coalition(3), 0.2).set(1, Coalition(3), 0.8);
        assert!(custom.validate(2).is_ok());
        assert!(custom.validate(1).is_err());
    }

    #[test]
    fn custom_weights_are_efficient() {
        let g = fixtures::random_game_seeded(3, 6);
        let mut ws = WeightSystem::min_owner();
        ws.set(0, Coalition(7), 0.1).set(1, Coalition(7), 0.2).set(2, Coalition(7), 0.7);
        let a = harsanyi_allocate(&g, &ws).unwrap();
        assert!(efficiency_gap(&g, &a).unwrap().abs() < 1e-12);
        assert_eq!(a.method, "harsanyi");
    }

    #[test]
    fn json_forms() {
        assert_eq!(WeightSystem::from_json(r#"{"preset":"egalitarian"}"#).unwrap(), WeightSystem::egalitarian());
        assert_eq!(WeightSystem::from_json(r#"{"preset":"min-owner"}"#).unwrap(), WeightSystem::min_owner());
        let ws = WeightSystem::from_json(
            r#"{"entries":[{"player":1,"coalition":1,"w":1},{"player":2,"coalition":2,"w":1},
                           {"player":1,"coalition":3,"w":0.25},{"player":2,"coalition":3,"w":0.75}]}"#,
        )
        .unwrap();
        assert_eq!(ws.preset_kind(), WeightPreset::Custom);
        let a = harsanyi_allocate(&fixtures::g2(), &ws).unwrap();
        assert_eq!(a.payoffs, vec![1.25, 2.75]);
        assert!(WeightSystem::from_json(r#"{"preset":"nope"}"#).is_err());
        assert!(WeightSystem::from_json(r#"{"entries":[{"player":0,"coalition":1,"w":1}]}"#).is_err());
    }
}
