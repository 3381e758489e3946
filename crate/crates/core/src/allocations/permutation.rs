use std::fmt;

use crate::error::{Error, Result};
use crate::game::{Coalition, Game};

/// An ordering of the players, `order[k]` being the player in position `k`.
///
/// Players are 0-based; orderings compare lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let d = order.len();
        let mut seen = vec![false; d];
        for &p in &order {
            if p >= d || seen[p] {
                return Err(Error::Permutation(format!("{order:?} is not a bijection of 0..{d}")));
            }
            seen[p] = true;
        }
        Ok(Permutation { order })
    }

    /// Parses a 1-based ordering such as `[2, 3, 1]`.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        if order.contains(&0) {
            return Err(Error::Permutation(format!("{order:?} uses 0 in a 1-based ordering")));
        }
        Self::new(order.iter().map(|p| p - 1).collect())
    }

    pub fn identity(d: usize) -> Self {
        Permutation { order: (0..d).collect() }
    }

    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(order.clone()).is_ok());
        Permutation { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|p| p + 1).collect()
    }

    /// Position of `player` in the ordering.
    pub fn position(&self, player: usize) -> usize {
        self.order.iter().position(|&p| p == player).expect("player in permutation")
    }

    /// Players up to and including `player`.
    pub fn predecessors(&self, player: usize) -> Coalition {
        Coalition::from_players(self.order[..=self.position(player)].iter().copied())
    }

    /// Advances to the next ordering in lexicographic order; false after the last.
    pub(crate) fn advance(&mut self) -> bool {
        let v = &mut self.order;
        let n = v.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.to_one_based())
    }
}

/// Marginal contribution of every player along a single ordering.
///
/// The entries telescope to v(D) − v(∅).
pub fn marginal_vector(g: &Game, perm: &Permutation) -> Vec<f64> {
    let mut out = vec![0.0; g.players()];
    accumulate_marginals(g, perm.order(), 1.0, &mut out);
    out
}

pub(crate) fn accumulate_marginals(g: &Game, order: &[usize], weight: f64, out: &mut [f64]) {
    let mut prefix = Coalition::EMPTY;
    let mut before = g.value(prefix);
    for &p in order {
        prefix = prefix.with(p);
        let after = g.value(prefix);
        out[p] += weight * (after - before);
        before = after;
    }
}
