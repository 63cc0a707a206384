//! Spanning trees of levelled complete bipartite support quivers.
//!
//! A localization tree is stored as one sink bitmask per source: the
//! neighbourhood `N(i)`. For a type-one dimension vector on a tree the
//! representation with all maps nonzero is unique, its subrepresentations are
//! the vertex sets closed under arrows, and the smallest closed set holding a
//! source set `T` is `T ∪ N(T)`. Adding further sinks only lowers the slope,
//! and sink-only sets have slope zero, so the tree is stable exactly when
//! `μ(T ∪ N(T)) < μ(Q)` for every nonempty proper source subset `T`.

mod canonical;
mod census;
pub mod prufer;

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quiver::{Side, SupportQuiver};

pub use canonical::{automorphism_count, automorphism_weight, canonical_form};
pub use census::{
    enumerate_spanning_trees, stable_spanning_trees, stable_weight_census, visit_spanning_trees,
    CensusMode, CensusStats, CensusSummary,
};

/// Strict slope comparison for closed vertex sets of a fixed support.
#[derive(Clone, Debug)]
pub(crate) struct SlopeTest {
    theta: u64,
    kappa: u64,
    sink_levels: Vec<u64>,
}

impl SlopeTest {
    pub(crate) fn new(q: &SupportQuiver) -> Self {
        Self {
            theta: q.theta(),
            kappa: q.kappa(),
            sink_levels: q.sinks().iter().map(|v| v.level as u64).collect(),
        }
    }

    pub(crate) fn sink_weight(&self, mut mask: u64) -> u64 {
        let mut w = 0;
        while mask != 0 {
            w += self.sink_levels[mask.trailing_zeros() as usize];
            mask &= mask - 1;
        }
        w
    }

    /// `μ(T ∪ N(T)) < μ(Q)` with `Θ(T) = source_weight`, `N(T) = sinks`.
    #[inline]
    pub(crate) fn below(&self, source_weight: u64, sinks: u64) -> bool {
        let w = self.sink_weight(sinks);
        (source_weight as u128) * (self.kappa as u128)
            < (self.theta as u128) * ((source_weight + w) as u128)
    }
}

/// An uncoloured type-one localization data: a spanning tree of the full
/// vertex set of a support quiver.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalizationTree {
    support: Arc<SupportQuiver>,
    neighbours: Vec<u64>,
}

impl LocalizationTree {
    /// Validates that `edges` (source index, sink index) form a spanning tree.
    pub fn new(support: Arc<SupportQuiver>, edges: &[(usize, usize)]) -> Result<Self> {
        let ns = support.sources().len();
        let nt = support.sinks().len();
        let mut neighbours = vec![0u64; ns];
        for &(i, j) in edges {
            if i >= ns || j >= nt {
                return Err(Error::InvalidTree(format!("edge ({i}, {j}) out of range")));
            }
            if neighbours[i] & (1 << j) != 0 {
                return Err(Error::InvalidTree(format!("duplicate edge ({i}, {j})")));
            }
            neighbours[i] |= 1 << j;
        }
        Self::from_neighbourhoods(support, neighbours)
    }

    pub fn from_labeled_edges(support: Arc<SupportQuiver>, edges: &[(String, String)]) -> Result<Self> {
        let mut idx = Vec::with_capacity(edges.len());
        for (s, t) in edges {
            let i = match support.locate(s) {
                Some((Side::Source, i)) => i,
                _ => return Err(Error::InvalidTree(format!("{s} is not a source"))),
            };
            let j = match support.locate(t) {
                Some((Side::Sink, j)) => j,
                _ => return Err(Error::InvalidTree(format!("{t} is not a sink"))),
            };
            idx.push((i, j));
        }
        Self::new(support, &idx)
    }

    pub fn from_neighbourhoods(support: Arc<SupportQuiver>, neighbours: Vec<u64>) -> Result<Self> {
        let ns = support.sources().len();
        let nt = support.sinks().len();
        if neighbours.len() != ns {
            return Err(Error::InvalidTree("one neighbourhood per source expected".into()));
        }
        let all = if nt == 64 { u64::MAX } else { (1u64 << nt) - 1 };
        let edge_count: u32 = neighbours.iter().map(|m| m.count_ones()).sum();
        if edge_count as usize != ns + nt - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges on {} vertices",
                edge_count,
                ns + nt
            )));
        }
        if neighbours.iter().any(|m| *m == 0 || m & !all != 0) {
            return Err(Error::InvalidTree("isolated source or sink out of range".into()));
        }
        // grow the component of source 0; with n−1 edges, connected ⇔ tree
        let mut reached_sources = 1u64;
        let mut reached_sinks = neighbours[0];
        loop {
            let before = (reached_sources, reached_sinks);
            for (i, m) in neighbours.iter().enumerate() {
                if m & reached_sinks != 0 {
                    reached_sources |= 1 << i;
                    reached_sinks |= m;
                }
            }
            if (reached_sources, reached_sinks) == before {
                break;
            }
        }
        if reached_sources.count_ones() as usize != ns || reached_sinks != all {
            return Err(Error::InvalidTree("edges do not connect every vertex".into()));
        }
        Ok(Self { support, neighbours })
    }

    pub(crate) fn from_masks_unchecked(support: Arc<SupportQuiver>, neighbours: Vec<u64>) -> Self {
        debug_assert!(Self::from_neighbourhoods(support.clone(), neighbours.clone()).is_ok());
        Self { support, neighbours }
    }

    pub fn support(&self) -> &SupportQuiver {
        &self.support
    }

    pub fn support_arc(&self) -> &Arc<SupportQuiver> {
        &self.support
    }

    /// Sink bitmask of each source.
    pub fn neighbourhoods(&self) -> &[u64] {
        &self.neighbours
    }

    pub fn source_neighbours(&self, i: usize) -> Vec<usize> {
        bits(self.neighbours[i]).collect()
    }

    pub fn sink_neighbours(&self, j: usize) -> Vec<usize> {
        (0..self.neighbours.len())
            .filter(|&i| self.neighbours[i] & (1 << j) != 0)
            .collect()
    }

    pub fn source_degree(&self, i: usize) -> u32 {
        self.neighbours[i].count_ones()
    }

    pub fn sink_degree(&self, j: usize) -> u32 {
        self.neighbours.iter().filter(|m| *m & (1 << j) != 0).count() as u32
    }

    /// `(source index, sink index)` pairs, source-major.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbours
            .iter()
            .enumerate()
            .flat_map(|(i, m)| bits(*m).map(move |j| (i, j)))
            .collect()
    }

    pub fn labeled_edges(&self) -> Vec<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(i, j)| {
                (
                    self.support.sources()[i].label.clone(),
                    self.support.sinks()[j].label.clone(),
                )
            })
            .collect()
    }

    /// Edge set as a bitmask with bit `i·#sinks + j`.
    pub fn edge_mask(&self) -> u128 {
        let nt = self.support.sinks().len();
        self.edges()
            .into_iter()
            .fold(0u128, |acc, (i, j)| acc | 1u128 << (i * nt + j))
    }

    /// Same tree with sources and sinks exchanged.
    pub fn transpose(&self) -> Self {
        let support = Arc::new(self.support.transpose());
        let nt = self.support.sinks().len();
        let neighbours = (0..nt)
            .map(|j| {
                self.sink_neighbours(j)
                    .into_iter()
                    .fold(0u64, |acc, i| acc | 1 << i)
            })
            .collect();
        Self { support, neighbours }
    }

    /// One line per source, in the order of the support quiver.
    pub fn diagram(&self) -> String {
        let mut out = String::new();
        for (i, src) in self.support.sources().iter().enumerate() {
            let targets: Vec<&str> = bits(self.neighbours[i])
                .map(|j| self.support.sinks()[j].label.as_str())
                .collect();
            let _ = writeln!(out, "{} -> {}", src.label, targets.join(", "));
        }
        out
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            support: (*self.support).clone(),
            edges: self
                .labeled_edges()
                .into_iter()
                .map(|(s, t)| [s, t])
                .collect(),
        }
    }

    pub fn from_document(doc: TreeDocument) -> Result<Self> {
        let edges: Vec<(String, String)> = doc
            .edges
            .into_iter()
            .map(|[s, t]| (s, t))
            .collect();
        Self::from_labeled_edges(Arc::new(doc.support), &edges)
    }
}

/// JSON form of a tree: `{"support": ..., "edges": [["i_1_1","j_2_1"], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub support: SupportQuiver,
    pub edges: Vec<[String; 2]>,
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let j = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(j)
        }
    })
}

/// Stability of the tree's unique representation with all maps nonzero.
pub fn is_stable(t: &LocalizationTree) -> bool {
    let test = SlopeTest::new(t.support());
    let levels: Vec<u64> = t.support().sources().iter().map(|v| v.level as u64).collect();
    let n = levels.len();
    assert!(n < 32, "stability test enumerates 2^n source subsets");
    let full = (1u64 << n) - 1;
    // subset sums built incrementally over the lowest set bit
    let mut theta = vec![0u64; 1 << n];
    let mut sinks = vec![0u64; 1 << n];
    for subset in 1..full {
        let low = subset.trailing_zeros() as usize;
        let rest = (subset & (subset - 1)) as usize;
        theta[subset as usize] = theta[rest] + levels[low];
        sinks[subset as usize] = sinks[rest] | t.neighbours[low];
        if !test.below(theta[subset as usize], sinks[subset as usize]) {
            return false;
        }
    }
    true
}

/// `v(t) = ∏_{edges (i,j)} l(i)·l(j)`.
pub fn tree_weight_v(t: &LocalizationTree) -> BigInt {
    let q = t.support();
    t.edges()
        .into_iter()
        .fold(BigInt::one(), |acc, (i, j)| {
            acc * q.sources()[i].level * q.sinks()[j].level
        })
}

/// `∏_q v(q)` with `v(q) = ∏_{q' ∈ N_q} l(q')`, vertex by vertex.
pub fn vertex_weight_product(t: &LocalizationTree) -> BigInt {
    let q = t.support();
    let mut acc = BigInt::one();
    for i in 0..q.sources().len() {
        for j in t.source_neighbours(i) {
            acc *= q.sinks()[j].level;
        }
    }
    for j in 0..q.sinks().len() {
        for i in t.sink_neighbours(j) {
            acc *= q.sources()[i].level;
        }
    }
    acc
}

/// Spanning trees of `K_{a,b}`: `a^{b−1}·b^{a−1}`.
pub fn cayley_count(a: u64, b: u64) -> BigInt {
    assert!(a >= 1 && b >= 1, "cayley_count needs a, b >= 1");
    BigInt::from(a).pow((b - 1) as u32) * BigInt::from(b).pow((a - 1) as u32)
}

/// Product of the vertex degrees of the multigraph `Q(partition)` with `m`
/// fixed, leaving out the first vertex of maximal degree (sources before
/// sinks). A source of level `l` has degree `l·b·m` and a sink of level `l`
/// has degree `l·a·m`, where `a`, `b` are the total source and sink weights.
pub fn degree_product_bound(q: &SupportQuiver, m: u64) -> BigInt {
    let a = q.theta();
    let b = q.kappa() - a;
    let degrees: Vec<BigInt> = q
        .sources()
        .iter()
        .map(|v| BigInt::from(v.level) * b * m)
        .chain(q.sinks().iter().map(|v| BigInt::from(v.level) * a * m))
        .collect();
    let max_at = degrees
        .iter()
        .enumerate()
        .fold(0, |best, (k, d)| if *d > degrees[best] { k } else { best });
    degrees
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != max_at)
        .fold(BigInt::one(), |acc, (_, d)| acc * d)
}
