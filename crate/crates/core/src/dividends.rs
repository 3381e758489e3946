//! Harsanyi dividends: the Möbius transform of a game on the subset lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_players, check_table, Coalition, Game};

/// Dividend of every coalition, indexed by mask like [`Game`].
///
/// The entry at ∅ equals v(∅) and the entries sum to v(D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct DividendTable {
    d: usize,
    dividends: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    d: usize,
    dividends: Vec<f64>,
}

impl TryFrom<TableRepr> for DividendTable {
    type Error = Error;

    fn try_from(r: TableRepr) -> Result<Self> {
        DividendTable::new(r.d, r.dividends)
    }
}

impl From<DividendTable> for TableRepr {
    fn from(t: DividendTable) -> Self {
        TableRepr { d: t.d, dividends: t.dividends }
    }
}

impl DividendTable {
    pub fn new(d: usize, dividends: Vec<f64>) -> Result<Self> {
        check_players(d, 30)?;
        check_table(d, &dividends)?;
        Ok(DividendTable { d, dividends })
    }

    pub fn players(&self) -> usize {
        self.d
    }

    pub fn dividends(&self) -> &[f64] {
        &self.dividends
    }

    #[inline]
    pub fn get(&self, c: Coalition) -> f64 {
        self.dividends[c.mask()]
    }

    /// Σ_A φ(A), which reconstructs v(D).
    pub fn total(&self) -> f64 {
        self.dividends.iter().sum()
    }
}

/// Dividends by the defining recursion `φ(A) = v(A) − Σ_{B⊊A} φ(B)`.
///
/// Visits every subset of every coalition (Θ(3^d)); kept as a cross-check for
/// [`dividends_fast`].
pub fn dividends_recursive(g: &Game) -> DividendTable {
    let d = g.players();
    let mut order: Vec<u32> = (0..1u32 << d).collect();
    order.sort_by_key(|m| (m.count_ones(), *m));

    let mut phi = vec![0.0; 1 << d];
    for m in order {
        let a = Coalition(m);
        let lower: f64 = a.subsets().skip(1).map(|b| phi[b.mask()]).sum();
        phi[a.mask()] = g.value(a) - lower;
    }
    DividendTable { d, dividends: phi }
}

/// Dividends `φ(A) = Σ_{B⊆A} (−1)^{|A|−|B|} v(B)` by the in-place subset
/// Möbius transform, Θ(d·2^d).
pub fn dividends_fast(g: &Game) -> DividendTable {
    let mut a = g.values().to_vec();
    mobius_in_place(&mut a, g.players());
    DividendTable { d: g.players(), dividends: a }
}

/// Rebuilds the game `v(A) = Σ_{B⊆A} φ(B)` (zeta transform).
pub fn zeta_reconstruct(t: &DividendTable) -> Game {
    let mut a = t.dividends.clone();
    zeta_in_place(&mut a, t.d);
    Game::with_cap(t.d, a, 30).expect("zeta transform preserves shape")
}

pub(crate) fn mobius_in_place(a: &mut [f64], d: usize) {
    for i in 0..d {
        let bit = 1 << i;
        for m in 0..a.len() {
            if m & bit != 0 {
                a[m] -= a[m ^ bit];
            }
        }
    }
}

pub(crate) fn zeta_in_place(a: &mut [f64], d: usize) {
    for i in 0..d {
        let bit = 1 << i;
        for m in 0..a.len() {
            if m & bit != 0 {
                a[m] += a[m ^ bit];
            }
        }
    }
}
