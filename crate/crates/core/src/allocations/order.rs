//! Random order distributions over player orderings.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::permutation::Permutation;
use crate::error::{Error, Result};
use crate::game::Coalition;

/// Tolerance on the total mass of an explicit pmf.
const PMF_TOLERANCE: f64 = 1e-9;

/// A pmf `p` over orderings of the players.
#[derive(Clone, Debug)]
pub enum RandomOrderDistribution {
    /// `p(π) = 1/d!`.
    Uniform,
    /// Finite support listed explicitly.
    Explicit(ExplicitPmf),
    /// Uniform over the linear extensions of a precedence DAG.
    PartialOrderUniform(PartialOrder),
    /// Opaque distribution available only through sampling.
    SeededSampler(Arc<dyn OrderSampler>),
}

impl RandomOrderDistribution {
    pub fn point_mass(perm: Permutation) -> Self {
        RandomOrderDistribution::Explicit(ExplicitPmf::new(vec![(perm, 1.0)]).expect("point mass is a pmf"))
    }

    pub(crate) fn sample(&self, d: usize, rng: &mut dyn RngCore, buf: &mut Vec<usize>) {
        buf.clear();
        match self {
            RandomOrderDistribution::Uniform => {
                buf.extend(0..d);
                buf.shuffle(rng);
            }
            RandomOrderDistribution::Explicit(pmf) => buf.extend_from_slice(pmf.sample(rng).order()),
            RandomOrderDistribution::PartialOrderUniform(po) => po.sample_into(rng, buf),
            RandomOrderDistribution::SeededSampler(s) => buf.extend_from_slice(s.sample(d, rng).order()),
        }
    }

    pub(crate) fn check_players(&self, d: usize) -> Result<()> {
        let got = match self {
            RandomOrderDistribution::Uniform | RandomOrderDistribution::SeededSampler(_) => return Ok(()),
            RandomOrderDistribution::Explicit(pmf) => pmf.players(),
            RandomOrderDistribution::PartialOrderUniform(po) => po.players(),
        };
        if got != d {
            return Err(Error::Dimension { expected: d, got });
        }
        Ok(())
    }
}

/// Source of random orderings for Monte Carlo Weber allocations.
///
/// Implementations must draw all randomness from `rng` so runs are
/// reproducible from the caller's seed.
pub trait OrderSampler: fmt::Debug + Send + Sync {
    fn sample(&self, d: usize, rng: &mut dyn RngCore) -> Permutation;
}

/// Always returns the same ordering.
#[derive(Clone, Debug)]
pub struct PointMassSampler(pub Permutation);

impl OrderSampler for PointMassSampler {
    fn sample(&self, _d: usize, _rng: &mut dyn RngCore) -> Permutation {
        self.0.clone()
    }
}

/// Explicit pmf with validated, distinct orderings in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitPmf {
    entries: Vec<(Permutation, f64)>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PmfEntry {
    order: Vec<usize>,
    p: f64,
}

impl ExplicitPmf {
    pub fn new(mut entries: Vec<(Permutation, f64)>) -> Result<Self> {
        let Some(d) = entries.first().map(|(p, _)| p.len()) else {
            return Err(Error::Distribution("empty support".into()));
        };
        for (perm, p) in &entries {
            if perm.len() != d {
                return Err(Error::Distribution(format!("ordering {perm:?} has {} players, expected {d}", perm.len())));
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Distribution(format!("probability {p} of {perm:?} is not a nonnegative number")));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Distribution(format!("ordering {:?} listed twice", w[0].0)));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::Distribution(format!("probabilities sum to {total}, not 1")));
        }
        let cumulative = entries
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e.1;
                Some(*acc)
            })
            .collect();
        Ok(ExplicitPmf { entries, cumulative })
    }

    /// Parses `[{"order":[1,2,3],"p":0.5}, …]` with 1-based players.
    pub fn from_json(src: &str) -> std::result::Result<Self, String> {
        let raw: Vec<PmfEntry> = serde_json::from_str(src).map_err(|e| e.to_string())?;
        let entries = raw
            .into_iter()
            .map(|e| Ok((Permutation::from_one_based(&e.order)?, e.p)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        ExplicitPmf::new(entries).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<PmfEntry> =
            self.entries.iter().map(|(perm, p)| PmfEntry { order: perm.to_one_based(), p: *p }).collect();
        serde_json::to_string(&raw).expect("pmf serializes")
    }

    pub fn players(&self) -> usize {
        self.entries[0].0.len()
    }

    pub fn entries(&self) -> &[(Permutation, f64)] {
        &self.entries
    }

    fn sample(&self, rng: &mut dyn RngCore) -> &Permutation {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.entries.len() - 1);
        &self.entries[k].0
    }
}

/// Precedence constraints between players: an edge `a → b` forces `a` before `b`.
#[derive(Clone, Debug)]
pub struct PartialOrder {
    d: usize,
    /// Direct predecessors of each player.
    preds: Vec<Coalition>,
    completions: OnceLock<Arc<Vec<u128>>>,
}

#[derive(Deserialize)]
struct DagRepr {
    edges: Vec<[usize; 2]>,
}

impl PartialOrder {
    /// Builds the order from 0-based edges, rejecting cycles and bad indices.
    pub fn new(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        crate::game::check_players(d, crate::game::DEFAULT_MAX_PLAYERS)?;
        let mut preds = vec![Coalition::EMPTY; d];
        for &(a, b) in edges {
            if a >= d || b >= d {
                return Err(Error::Distribution(format!("edge ({}, {}) names a player outside 1..={d}", a + 1, b + 1)));
            }
            if a == b {
                return Err(Error::Cycle { player: a + 1 });
            }
            preds[b] = preds[b].with(a);
        }
        // Kahn's algorithm; anything left over sits on or behind a cycle.
        let mut placed = Coalition::EMPTY;
        loop {
            let ready: Vec<usize> =
                (0..d).filter(|&j| !placed.contains(j) && preds[j].is_subset_of(placed)).collect();
            if ready.is_empty() {
                break;
            }
            for j in ready {
                placed = placed.with(j);
            }
        }
        if placed != Coalition::full(d) {
            let stuck = placed.complement(d);
            let on_cycle = stuck.players().find(|&j| preds[j].is_subset_of(stuck)).unwrap_or(0);
            return Err(Error::Cycle { player: on_cycle + 1 });
        }
        Ok(PartialOrder { d, preds, completions: OnceLock::new() })
    }

    /// Parses `{"edges":[[1,2],…]}` with 1-based players.
    pub fn from_json(d: usize, src: &str) -> std::result::Result<Self, String> {
        let raw: DagRepr = serde_json::from_str(src).map_err(|e| e.to_string())?;
        if raw.edges.iter().flatten().any(|&p| p == 0) {
            return Err("players are 1-based; found 0".into());
        }
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e[0] - 1, e[1] - 1)).collect();
        PartialOrder::new(d, &edges).map_err(|e| e.to_string())
    }

    pub fn players(&self) -> usize {
        self.d
    }

    pub fn precedes_directly(&self, a: usize, b: usize) -> bool {
        self.preds[b].contains(a)
    }

    /// `completions[S]`: number of ways to order `D \ S` after the downset `S`.
    fn completions(&self) -> &[u128] {
        self.completions.get_or_init(|| {
            let n = 1usize << self.d;
            let mut c = vec![0u128; n];
            c[n - 1] = 1;
            for m in (0..n - 1).rev() {
                let s = Coalition(m as u32);
                c[m] = s
                    .complement(self.d)
                    .players()
                    .filter(|&j| self.preds[j].is_subset_of(s))
                    .map(|j| c[s.with(j).mask()])
                    .sum();
            }
            Arc::new(c)
        })
    }

    /// Number of linear extensions.
    pub fn extension_count(&self) -> u128 {
        self.completions()[0]
    }

    fn available(&self, placed: Coalition) -> impl Iterator<Item = usize> + '_ {
        placed.complement(self.d).players().filter(move |&j| self.preds[j].is_subset_of(placed))
    }

    /// Every linear extension in lexicographic order.
    pub fn linear_extensions(&self) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(self.d);
        self.extend(Coalition::EMPTY, &mut prefix, &mut out);
        out
    }

    fn extend(&self, placed: Coalition, prefix: &mut Vec<usize>, out: &mut Vec<Permutation>) {
        if prefix.len() == self.d {
            out.push(Permutation::from_vec_unchecked(prefix.clone()));
            return;
        }
        let next: Vec<usize> = self.available(placed).collect();
        for j in next {
            prefix.push(j);
            self.extend(placed.with(j), prefix, out);
            prefix.pop();
        }
    }

    /// Draws a linear extension uniformly at random.
    ///
    /// Each step picks an available player with probability proportional to
    /// the number of extensions that continue through it.
    pub(crate) fn sample_into(&self, rng: &mut dyn RngCore, buf: &mut Vec<usize>) {
        let c = self.completions();
        let mut placed = Coalition::EMPTY;
        while placed.len() < self.d {
            let mut u = rng.random_range(0..c[placed.mask()]);
            let mut pick = None;
            for j in self.available(placed) {
                let w = c[placed.with(j).mask()];
                if u < w {
                    pick = Some(j);
                    break;
                }
                u -= w;
            }
            let j = pick.expect("completion counts are consistent");
            buf.push(j);
            placed = placed.with(j);
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Permutation {
        let mut buf = Vec::with_capacity(self.d);
        self.sample_into(rng, &mut buf);
        Permutation::from_vec_unchecked(buf)
    }
}

/// Uniform distribution over the orderings consistent with a causal DAG.
pub fn causal_orderings(d: usize, edges: &[(usize, usize)]) -> Result<RandomOrderDistribution> {
    Ok(RandomOrderDistribution::PartialOrderUniform(PartialOrder::new(d, edges)?))
}
