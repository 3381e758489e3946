//! Coalitions, games and allocations.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of players of a dense game.
pub const DEFAULT_MAX_PLAYERS: usize = 20;

/// Hard ceiling imposed by the `u32` coalition mask.
const MASK_BITS: usize = 30;

/// Absolute tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-10;

/// A subset of players stored as a little-endian bitmask.
///
/// Bit `j` is player `j` (0-based); reports print it as `j + 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(d: usize) -> Self {
        Coalition(((1u64 << d) - 1) as u32)
    }

    pub fn singleton(player: usize) -> Self {
        Coalition(1 << player)
    }

    pub fn from_players<I: IntoIterator<Item = usize>>(players: I) -> Self {
        Coalition(players.into_iter().fold(0, |m, p| m | (1 << p)))
    }

    #[inline]
    pub fn mask(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    #[inline]
    pub fn with(self, player: usize) -> Self {
        Coalition(self.0 | 1 << player)
    }

    #[inline]
    pub fn without(self, player: usize) -> Self {
        Coalition(self.0 & !(1 << player))
    }

    #[inline]
    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    /// `D \ self` for a game with `d` players.
    #[inline]
    pub fn complement(self, d: usize) -> Self {
        Coalition(!self.0 & Coalition::full(d).0)
    }

    /// Members in increasing order.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(p)
            }
        })
    }

    /// Every subset of `self`, in decreasing mask order, ending with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(Coalition(cur))
        })
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.players().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p + 1)?;
        }
        f.write_str("}")
    }
}

/// A transferable-utility game: the worth of each of the `2^d` coalitions.
///
/// `values[0]` is v(∅) and `values[2^d - 1]` is v(D). v(∅) is kept as given
/// and never assumed to be zero.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "GameRepr")]
pub struct Game {
    d: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct GameRepr {
    d: usize,
    values: Vec<f64>,
}

impl TryFrom<GameRepr> for Game {
    type Error = Error;

    fn try_from(repr: GameRepr) -> Result<Self> {
        Game::new(repr.d, repr.values)
    }
}

pub(crate) fn check_players(d: usize, cap: usize) -> Result<()> {
    let max = cap.min(MASK_BITS);
    if d == 0 || d > max {
        return Err(Error::PlayerCount { d, max });
    }
    Ok(())
}

pub(crate) fn check_table(d: usize, values: &[f64]) -> Result<()> {
    let expected = 1usize << d;
    if values.len() != expected {
        return Err(Error::TableSize { d, expected, got: values.len() });
    }
    if let Some((m, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { coalition: Coalition(m as u32), value });
    }
    Ok(())
}

impl Game {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_cap(d, values, DEFAULT_MAX_PLAYERS)
    }

    /// Like [`Game::new`] with a caller-chosen player cap (at most 30).
    pub fn with_cap(d: usize, values: Vec<f64>, cap: usize) -> Result<Self> {
        check_players(d, cap)?;
        check_table(d, &values)?;
        Ok(Game { d, values })
    }

    #[inline]
    pub fn players(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, c: Coalition) -> f64 {
        self.values[c.mask()]
    }

    #[inline]
    pub fn grand(&self) -> Coalition {
        Coalition::full(self.d)
    }

    pub fn v_empty(&self) -> f64 {
        self.values[0]
    }

    pub fn v_full(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// v(D) − v(∅), the amount every efficient allocation distributes.
    pub fn surplus(&self) -> f64 {
        self.v_full() - self.v_empty()
    }

    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> {
        (0..1u32 << self.d).map(Coalition)
    }

    /// Pointwise `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Game, beta: f64) -> Result<Game> {
        if other.d != self.d {
            return Err(Error::Dimension { expected: self.d, got: other.d });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Game::with_cap(self.d, values, MASK_BITS)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Serialize for Game {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Game", 2)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("values", &self.values)?;
        st.end()
    }
}

/// Tabulates `oracle` on every coalition, possibly in parallel.
///
/// Fails on the lowest-mask coalition whose value is not finite.
pub fn build_game<F>(d: usize, oracle: F) -> Result<Game>
where
    F: Fn(Coalition) -> f64 + Sync,
{
    check_players(d, DEFAULT_MAX_PLAYERS)?;
    let values: Vec<f64> = (0..1u32 << d).into_par_iter().map(|m| oracle(Coalition(m))).collect();
    check_table(d, &values)?;
    Ok(Game { d, values })
}

/// Sequential variant of [`build_game`] for oracles that are not thread-safe.
pub fn build_game_serial<F>(d: usize, mut oracle: F) -> Result<Game>
where
    F: FnMut(Coalition) -> f64,
{
    check_players(d, DEFAULT_MAX_PLAYERS)?;
    let mut values = Vec::with_capacity(1 << d);
    for m in 0..1u32 << d {
        let value = oracle(Coalition(m));
        if !value.is_finite() {
            return Err(Error::NonFinite { coalition: Coalition(m), value });
        }
        values.push(value);
    }
    Ok(Game { d, values })
}

/// The dual game `w(A) = v(D) − v(D \ A)`.
pub fn dual_game(g: &Game) -> Game {
    let full = g.grand().mask();
    let vd = g.v_full();
    let values = (0..g.values.len()).map(|m| vd - g.values[full & !m]).collect();
    Game { d: g.d, values }
}

/// One payoff per player, tagged with the method that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub payoffs: Vec<f64>,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
}

impl Allocation {
    pub fn new(method: impl Into<String>, payoffs: Vec<f64>) -> Self {
        Allocation { payoffs, method: method.into(), stderr: None }
    }

    pub fn with_stderr(mut self, stderr: Vec<f64>) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn total(&self) -> f64 {
        self.payoffs.iter().sum()
    }

    /// Largest absolute coordinate difference to another allocation.
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.payoffs.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `Σ_j payoffs[j] − (v(D) − v(∅))`.
pub fn efficiency_gap(g: &Game, a: &Allocation) -> Result<f64> {
    if a.payoffs.len() != g.players() {
        return Err(Error::Dimension { expected: g.players(), got: a.payoffs.len() });
    }
    Ok(a.total() - g.surplus())
}
