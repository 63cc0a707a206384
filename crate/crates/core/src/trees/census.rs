//! Backtracking census of labeled spanning trees.
//!
//! Sources are processed in order; each picks its sink neighbourhood with at
//! most one sink from every component of the forest built so far, so the
//! partial structure stays acyclic. The last source must touch every
//! remaining component, which makes each completed assignment a spanning
//! tree. In [`CensusMode::Stable`] a branch is cut as soon as a set of
//! completed sources together with its neighbourhood reaches the slope of the
//! whole quiver; later sources never change that set's slope.
//!
//! Sinks that no source has touched yet and that share a level are
//! interchangeable for the rest of the search. The weight census picks such
//! sinks in index order only and counts each representative with the number
//! of labeled choices it stands for.

use std::ops::AddAssign;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::{bits, LocalizationTree, SlopeTest};
use crate::quiver::SupportQuiver;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusMode {
    /// Every spanning tree.
    All,
    /// Stable trees only, with early pruning.
    Stable,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CensusStats {
    /// Completed spanning trees reached by the search.
    pub enumerated: u64,
    /// Completed trees that are stable.
    pub stable: u64,
    /// Partial trees discarded by the slope test.
    pub pruned: u64,
}

impl AddAssign for CensusStats {
    fn add_assign(&mut self, rhs: Self) {
        self.enumerated += rhs.enumerated;
        self.stable += rhs.stable;
        self.pruned += rhs.pruned;
    }
}

/// Stable weight sum `Σ_{stable t} v(t)` of one support signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusSummary {
    pub weight_sum: BigInt,
    pub stats: CensusStats,
}

struct Search<'a> {
    test: &'a SlopeTest,
    source_levels: Vec<u64>,
    mode: CensusMode,
    neighbours: Vec<u64>,
    /// Collapse interchangeable untouched sinks.
    symmetric: bool,
    /// Sink masks grouped by level.
    sink_classes: Vec<u64>,
    /// Sinks outside every chosen neighbourhood.
    untouched: u64,
    /// `rest_min[k]`: least total degree of the sources after `k` in any
    /// completion (counted only in stable mode).
    rest_min: Vec<usize>,
    /// `(Θ(T), N(T))` for every subset `T` of the completed sources,
    /// indexed by the subset's bitmask.
    subsets: Vec<(u64, u64)>,
    stats: CensusStats,
}

impl<'a> Search<'a> {
    fn new(test: &'a SlopeTest, q: &SupportQuiver, mode: CensusMode, symmetric: bool) -> Self {
        let n = q.sources().len();
        let mut subsets = Vec::with_capacity(if mode == CensusMode::Stable { 1 << n } else { 1 });
        subsets.push((0, 0));
        let min_degree = match mode {
            CensusMode::Stable => minimum_degrees(q),
            CensusMode::All => vec![1; n],
        };
        let mut rest_min = vec![0usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            rest_min[k] = rest_min[k + 1] + min_degree[k + 1];
        }
        let mut sink_classes: Vec<(u32, u64)> = Vec::new();
        for (j, v) in q.sinks().iter().enumerate() {
            match sink_classes.iter_mut().find(|(l, _)| *l == v.level) {
                Some((_, mask)) => *mask |= 1 << j,
                None => sink_classes.push((v.level, 1 << j)),
            }
        }
        let nt = q.sinks().len();
        Self {
            test,
            source_levels: q.sources().iter().map(|v| v.level as u64).collect(),
            mode,
            neighbours: vec![0; n],
            symmetric,
            sink_classes: sink_classes.into_iter().map(|(_, m)| m).collect(),
            untouched: if nt == 64 { u64::MAX } else { (1u64 << nt) - 1 },
            rest_min,
            subsets,
            stats: CensusStats::default(),
        }
    }

    /// Neighbourhoods source `k` may take. Each source of degree `d` merges
    /// `d` components, so the remaining sources' degrees sum to exactly
    /// `#components + #remaining − 1`; that caps the degree of source `k`.
    /// Each choice comes with the number of labeled choices it represents.
    fn choices(&self, k: usize, comps: &[u64]) -> Vec<(u64, u64)> {
        let remaining = self.sources() - k;
        let budget = comps.len() + remaining - 1;
        let cap = match budget.checked_sub(self.rest_min[k]) {
            Some(cap) if cap >= 1 => cap,
            _ => return Vec::new(),
        };
        let cover_all = remaining == 1;
        if !self.symmetric {
            return neighbourhood_choices(comps, cover_all, cap)
                .into_iter()
                .map(|c| (c, 1))
                .collect();
        }
        if cover_all && comps.len() > cap {
            return Vec::new();
        }
        let touched: Vec<u64> = comps.iter().copied().filter(|c| c & self.untouched == 0).collect();
        let mut out: Vec<(u64, u64)> = neighbourhood_choices(&touched, cover_all, cap)
            .into_iter()
            .map(|c| (c, 1))
            .collect();
        if !cover_all || touched.is_empty() {
            out.push((0, 1));
        }
        for &class in &self.sink_classes {
            let free: Vec<usize> = bits(class & self.untouched).collect();
            let s = free.len();
            if s == 0 {
                continue;
            }
            let mut grown = Vec::new();
            for &(partial, mult) in &out {
                let used = partial.count_ones() as usize;
                let lo = if cover_all { s } else { 0 };
                for r in lo..=s.min(cap.saturating_sub(used)) {
                    let mask = free[..r].iter().fold(partial, |m, j| m | 1 << j);
                    grown.push((mask, mult.saturating_mul(binomial(s as u64, r as u64))));
                }
            }
            out = grown;
        }
        out.retain(|(m, _)| *m != 0);
        out
    }

    fn sources(&self) -> usize {
        self.source_levels.len()
    }

    /// Sets source `k`'s neighbourhood to `choice`, then continues the search.
    fn assign<F: FnMut(&[u64], u64)>(&mut self, k: usize, comps: &[u64], choice: u64, mult: u64, visit: &mut F) {
        if self.mode == CensusMode::Stable {
            let level = self.source_levels[k];
            let count = self.subsets.len();
            let last = k + 1 == self.sources();
            for idx in 0..count {
                if last && idx == count - 1 {
                    break; // T = all sources is not proper
                }
                let (theta, sinks) = self.subsets[idx];
                if !self.test.below(theta + level, sinks | choice) {
                    self.subsets.truncate(count);
                    self.stats.pruned = self.stats.pruned.saturating_add(1);
                    return;
                }
                self.subsets.push((theta + level, sinks | choice));
            }
            if last {
                self.subsets.truncate(count);
            }
        }
        self.neighbours[k] = choice;
        let merged = comps
            .iter()
            .filter(|c| *c & choice != 0)
            .fold(0u64, |acc, c| acc | c);
        let mut next: Vec<u64> = comps.iter().copied().filter(|c| c & choice == 0).collect();
        next.push(merged);
        let untouched = self.untouched;
        self.untouched &= !choice;
        self.descend(k + 1, &next, mult, visit);
        self.untouched = untouched;
        if self.mode == CensusMode::Stable {
            self.subsets.truncate(1 << k);
        }
    }

    fn descend<F: FnMut(&[u64], u64)>(&mut self, k: usize, comps: &[u64], mult: u64, visit: &mut F) {
        if k == self.sources() {
            debug_assert_eq!(comps.len(), 1);
            self.stats.enumerated = self.stats.enumerated.saturating_add(mult);
            if self.mode == CensusMode::Stable {
                self.stats.stable = self.stats.stable.saturating_add(mult);
            }
            visit(&self.neighbours, mult);
            return;
        }
        for (choice, m) in self.choices(k, comps) {
            self.assign(k, comps, choice, mult.saturating_mul(m), visit);
        }
    }
}

/// Nonempty sink sets of at most `cap` sinks with at most one sink per
/// component (exactly one when `cover_all`).
fn neighbourhood_choices(comps: &[u64], cover_all: bool, cap: usize) -> Vec<u64> {
    if cover_all && comps.len() > cap {
        return Vec::new();
    }
    let mut out = vec![0u64];
    for &comp in comps {
        let mut grown = Vec::with_capacity(out.len() * (comp.count_ones() as usize + 1));
        for &partial in &out {
            if !cover_all {
                grown.push(partial);
            }
            if (partial.count_ones() as usize) < cap {
                for j in bits(comp) {
                    grown.push(partial | 1 << j);
                }
            }
        }
        out = grown;
    }
    out.retain(|m| *m != 0);
    out
}

/// Fewest sinks a source can have in a stable tree: `{i}` is a proper
/// source set when there are at least two sources, so its neighbours must
/// weigh more than `l(i)·(κ−Θ)/Θ`. Unreachable weights give `#sinks + 1`.
fn minimum_degrees(q: &SupportQuiver) -> Vec<usize> {
    let n = q.sources().len();
    if n < 2 {
        return vec![1; n];
    }
    let theta = q.theta();
    let rest = q.kappa() - theta;
    let mut levels: Vec<u64> = q.sinks().iter().map(|v| v.level as u64).collect();
    levels.sort_unstable_by(|x, y| y.cmp(x));
    q.sources()
        .iter()
        .map(|v| {
            let need = v.level as u64 * rest / theta + 1;
            let mut acc = 0;
            levels
                .iter()
                .position(|l| {
                    acc += l;
                    acc >= need
                })
                .map_or(levels.len() + 1, |d| d + 1)
        })
        .collect()
}

fn binomial(n: u64, r: u64) -> u64 {
    num_integer::binomial(n, r)
}

fn initial_components(q: &SupportQuiver) -> Vec<u64> {
    (0..q.sinks().len()).map(|j| 1u64 << j).collect()
}

/// Runs the census sequentially, calling `visit` with the neighbourhood
/// masks of every completed tree.
pub fn visit_spanning_trees<F: FnMut(&[u64])>(q: &SupportQuiver, mode: CensusMode, mut visit: F) -> CensusStats {
    let test = SlopeTest::new(q);
    let mut search = Search::new(&test, q, mode, false);
    search.descend(0, &initial_components(q), 1, &mut |masks, _| visit(masks));
    search.stats
}

pub fn enumerate_spanning_trees(q: &SupportQuiver) -> Vec<LocalizationTree> {
    collect(q, CensusMode::All)
}

pub fn stable_spanning_trees(q: &SupportQuiver) -> Vec<LocalizationTree> {
    collect(q, CensusMode::Stable)
}

fn collect(q: &SupportQuiver, mode: CensusMode) -> Vec<LocalizationTree> {
    let support = Arc::new(q.clone());
    let mut out = Vec::new();
    visit_spanning_trees(q, mode, |masks| {
        out.push(LocalizationTree::from_masks_unchecked(support.clone(), masks.to_vec()));
    });
    out
}

/// Per-tree weight `∏_i l(i)^{deg i} · ∏_j l(j)^{deg j}`.
struct WeightFn {
    source_levels: Vec<u64>,
    sink_levels: Vec<u64>,
    trivial: bool,
}

impl WeightFn {
    fn new(q: &SupportQuiver) -> Self {
        let source_levels: Vec<u64> = q.sources().iter().map(|v| v.level as u64).collect();
        let sink_levels: Vec<u64> = q.sinks().iter().map(|v| v.level as u64).collect();
        let trivial = source_levels.iter().chain(&sink_levels).all(|l| *l == 1);
        Self { source_levels, sink_levels, trivial }
    }

    fn weight(&self, masks: &[u64]) -> BigUint {
        if self.trivial {
            return BigUint::from(1u32);
        }
        let mut acc = BigUint::from(1u32);
        for (i, m) in masks.iter().enumerate() {
            for j in bits(*m) {
                acc *= self.source_levels[i] * self.sink_levels[j];
            }
        }
        acc
    }
}

/// `Σ v(t)` over the stable trees of `q`, sharded across the rayon pool by
/// the first source's neighbourhood. The reduction is exact integer
/// addition, so the result does not depend on scheduling.
///
/// The search runs over the side with fewer vertices.
///
/// In [`CensusMode::All`] every tree is enumerated and filtered afterwards;
/// the result is the same, only the statistics differ.
pub fn stable_weight_census(q: &SupportQuiver, mode: CensusMode) -> CensusSummary {
    // transposing keeps stability and weights; search from the smaller side
    if q.sources().len() > q.sinks().len() {
        return stable_weight_census(&q.transpose(), mode);
    }
    let test = SlopeTest::new(q);
    let weight = WeightFn::new(q);
    let comps = initial_components(q);
    let shards = Search::new(&test, q, mode, true).choices(0, &comps);
    let (sum, stats) = shards
        .par_iter()
        .map(|&(first, first_mult)| {
            let mut search = Search::new(&test, q, mode, true);
            let mut sum = BigUint::zero();
            let mut stable = 0u64;
            let check_all = mode == CensusMode::All;
            search.assign(0, &comps, first, first_mult, &mut |masks: &[u64], mult: u64| {
                if check_all && !masks_are_stable(&test, &weight.source_levels, masks) {
                    return;
                }
                stable = stable.saturating_add(mult);
                sum += weight.weight(masks) * mult;
            });
            let mut stats = search.stats;
            stats.stable = stable;
            (sum, stats)
        })
        .reduce(
            || (BigUint::zero(), CensusStats::default()),
            |(s1, mut t1), (s2, t2)| {
                t1 += t2;
                (s1 + s2, t1)
            },
        );
    CensusSummary { weight_sum: BigInt::from(sum), stats }
}

fn masks_are_stable(test: &SlopeTest, levels: &[u64], masks: &[u64]) -> bool {
    let n = masks.len();
    let full = (1u64 << n) - 1;
    (1..full).all(|subset| {
        let (theta, sinks) = bits(subset).fold((0, 0), |(t, s), i| (t + levels[i], s | masks[i]));
        test.below(theta, sinks)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{cayley_count, is_stable};
    use num_bigint::BigInt;
    use std::collections::HashSet;

    fn q(src: &[u32], snk: &[u32]) -> SupportQuiver {
        SupportQuiver::from_levels(src, snk).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_spanning_trees(&q(&[1], &[1, 1, 1, 1])).len(), 1);
        assert_eq!(enumerate_spanning_trees(&q(&[1, 1], &[1, 1, 1])).len(), 12);
        assert_eq!(enumerate_spanning_trees(&q(&[1; 3], &[1; 3])).len(), 81);
    }

    #[test]
    fn counts_match_cayley_and_are_distinct() {
        for a in 1..=4usize {
            for b in 1..=4usize {
                let trees = enumerate_spanning_trees(&q(&vec![1; a], &vec![1; b]));
                assert_eq!(BigInt::from(trees.len()), cayley_count(a as u64, b as u64));
                let masks: HashSet<u128> = trees.iter().map(|t| t.edge_mask()).collect();
                assert_eq!(masks.len(), trees.len());
            }
        }
    }

    #[test]
    fn pruned_search_finds_exactly_the_stable_trees() {
        for (src, snk) in [
            (vec![1, 1], vec![1, 1, 1]),
            (vec![1, 2], vec![1, 1, 1, 1, 1]),
            (vec![1, 1, 1], vec![1, 1, 1, 1]),
            (vec![1, 1, 2], vec![1, 2, 1]),
            (vec![3], vec![1, 1, 2]),
            (vec![1, 1, 1], vec![1; 7]),
            (vec![1, 1], vec![2, 1, 1, 1, 1]),
            (vec![1, 1, 1, 1], vec![1, 1, 1, 1, 1]),
            (vec![1, 2], vec![1, 1, 1, 1, 1, 1, 1]),
        ] {
            let support = q(&src, &snk);
            let filtered: HashSet<u128> = enumerate_spanning_trees(&support)
                .into_iter()
                .filter(is_stable)
                .map(|t| t.edge_mask())
                .collect();
            let pruned: HashSet<u128> = stable_spanning_trees(&support)
                .into_iter()
                .map(|t| t.edge_mask())
                .collect();
            assert_eq!(filtered, pruned, "{src:?} {snk:?}");
            let all = stable_weight_census(&support, CensusMode::All);
            let fast = stable_weight_census(&support, CensusMode::Stable);
            let flipped = stable_weight_census(&support.transpose(), CensusMode::Stable);
            assert_eq!(all.weight_sum, fast.weight_sum);
            assert_eq!(flipped.weight_sum, fast.weight_sum);
            assert_eq!(all.stats.stable, fast.stats.stable);
            assert_eq!(fast.stats.stable as usize, pruned.len());
        }
    }

    #[test]
    fn census_weight_for_the_level_one_two_sinks() {
        // two labeled stable trees of weight 4
        let s = stable_weight_census(&q(&[1, 1], &[1, 2]), CensusMode::Stable);
        assert_eq!(s.weight_sum, BigInt::from(8));
        assert_eq!(s.stats.stable, 2);
    }
}
