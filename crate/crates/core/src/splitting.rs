//! Refining localization data one vertex at a time.
//!
//! A source of level `k ≥ 2` with neighbours `J` is replaced by a level-1
//! source adjacent to `J_1` and a level-`(k−1)` source adjacent to `J_2`,
//! where `J_1 ∪ J_2 = J` and `J_1 ∩ J_2 = {j_t}`. The total slope is
//! unchanged and the result is again a tree. Sinks of level `≥ 2` are split
//! the same way after transposing.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::partitions::WeightedPartition;
use crate::quiver::{swap_prefix, Side, SupportQuiver, Vertex};
use crate::trees::{bits, canonical_form, is_stable, LocalizationTree};

/// Replaces one part `k` by parts `1` and `k − 1`.
pub fn refine_partition_at(p: &WeightedPartition, k: u32) -> Result<WeightedPartition> {
    if k < 2 {
        return Err(Error::InvalidSplit(format!("cannot split parts of size {k}")));
    }
    if p.multiplicity(k) == 0 {
        return Err(Error::InvalidSplit(format!("{p} has no part of size {k}")));
    }
    let mut parts = p.parts_map().clone();
    *parts.get_mut(&k).expect("checked above") -= 1;
    *parts.entry(1).or_insert(0) += 1;
    *parts.entry(k - 1).or_insert(0) += 1;
    WeightedPartition::new(parts)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SplitMove {
    pub side: Side,
    /// Label of the vertex being split.
    pub vertex: String,
    pub level: u32,
    /// Neighbours as `J_1 \ {j_t}`, then `j_t`, then `J_2 \ {j_t}`.
    pub ordering: Vec<String>,
    /// 1-based position of the shared neighbour `j_t` in `ordering`.
    pub shared_index: usize,
    /// `Σ l ≤ k·Σ_{J_1} l` and `(k−1)·Σ l ≤ k·Σ_{J_2} l`.
    pub satisfies_inequalities: bool,
}

impl SplitMove {
    /// Neighbours of the new level-1 vertex.
    pub fn first_part(&self) -> &[String] {
        &self.ordering[..self.shared_index]
    }

    /// Neighbours of the new level-`(k−1)` vertex.
    pub fn second_part(&self) -> &[String] {
        &self.ordering[self.shared_index - 1..]
    }

    fn transposed(&self) -> Self {
        Self {
            side: self.side.other(),
            vertex: swap_prefix(&self.vertex),
            ordering: self.ordering.iter().map(|l| swap_prefix(l)).collect(),
            ..self.clone()
        }
    }
}

fn split_inequalities(k: u64, levels_1: u64, levels_2: u64, total: u64) -> bool {
    total <= k * levels_1 && (k - 1) * total <= k * levels_2
}

fn source_index(t: &LocalizationTree, label: &str) -> Result<usize> {
    match t.support().locate(label) {
        Some((Side::Source, i)) => Ok(i),
        Some((Side::Sink, _)) => Err(Error::Internal(format!("{label} is a sink"))),
        None => Err(Error::InvalidSplit(format!("no vertex labeled {label}"))),
    }
}

/// All decompositions of a source's neighbourhood, stability not checked.
fn source_candidates(t: &LocalizationTree, label: &str) -> Result<Vec<SplitMove>> {
    let i = source_index(t, label)?;
    let q = t.support();
    let k = q.sources()[i].level;
    if k < 2 {
        return Err(Error::InvalidSplit(format!("{label} has level 1")));
    }
    let nbrs: Vec<usize> = t.source_neighbours(i);
    let level = |j: usize| q.sinks()[j].level as u64;
    let total: u64 = nbrs.iter().map(|&j| level(j)).sum();
    let mut out = Vec::new();
    for &shared in &nbrs {
        let others: Vec<usize> = nbrs.iter().copied().filter(|&j| j != shared).collect();
        for choice in 0u64..(1 << others.len()) {
            let (mut first, mut second) = (Vec::new(), Vec::new());
            for (n, &j) in others.iter().enumerate() {
                if choice & (1 << n) != 0 {
                    first.push(j);
                } else {
                    second.push(j);
                }
            }
            let sum = |js: &[usize]| js.iter().map(|&j| level(j)).sum::<u64>() + level(shared);
            let ordering: Vec<String> = first
                .iter()
                .chain(std::iter::once(&shared))
                .chain(&second)
                .map(|&j| q.sinks()[j].label.clone())
                .collect();
            out.push(SplitMove {
                side: Side::Source,
                vertex: label.to_string(),
                level: k,
                ordering,
                shared_index: first.len() + 1,
                satisfies_inequalities: split_inequalities(k as u64, sum(&first), sum(&second), total),
            });
        }
    }
    Ok(out)
}

fn apply_source_split(t: &LocalizationTree, mv: &SplitMove) -> Result<LocalizationTree> {
    let i = source_index(t, &mv.vertex)?;
    let q = t.support();
    let k = q.sources()[i].level;
    if k < 2 || mv.level != k {
        return Err(Error::InvalidSplit(format!("{} does not have level {}", mv.vertex, mv.level)));
    }
    if mv.shared_index == 0 || mv.shared_index > mv.ordering.len() {
        return Err(Error::InvalidSplit(format!("shared index {} out of range", mv.shared_index)));
    }
    let mut ordered = 0u64;
    let mut mask_of = |labels: &[String]| -> Result<u64> {
        let mut m = 0u64;
        for l in labels {
            match q.locate(l) {
                Some((Side::Sink, j)) => m |= 1 << j,
                _ => return Err(Error::InvalidSplit(format!("{l} is not a sink"))),
            }
        }
        ordered |= m;
        Ok(m)
    };
    let first = mask_of(mv.first_part())?;
    let second = mask_of(mv.second_part())?;
    if ordered != t.neighbourhoods()[i] || mv.ordering.len() != ordered.count_ones() as usize {
        return Err(Error::InvalidSplit(format!(
            "ordering is not the neighbourhood of {}",
            mv.vertex
        )));
    }

    // old sources keep their relative order; new ones go last within a level
    let mut entries: Vec<(u32, u64)> = q
        .sources()
        .iter()
        .zip(t.neighbourhoods())
        .enumerate()
        .filter(|(n, _)| *n != i)
        .map(|(_, (v, m))| (v.level, *m))
        .collect();
    entries.push((1, first));
    entries.push((k - 1, second));
    entries.sort_by_key(|(level, _)| *level);

    let mut seen: HashMap<u32, u32> = HashMap::new();
    let sources: Vec<Vertex> = entries
        .iter()
        .map(|&(level, _)| {
            let c = seen.entry(level).or_insert(0);
            *c += 1;
            Vertex { label: format!("i_{level}_{c}"), level }
        })
        .collect();
    let support = Arc::new(SupportQuiver::new(sources, q.sinks().to_vec())?);
    LocalizationTree::from_neighbourhoods(support, entries.into_iter().map(|(_, m)| m).collect())
}

/// Splits `mv.vertex` as described by the move. The result must be stable.
pub fn apply_split(t: &LocalizationTree, mv: &SplitMove) -> Result<LocalizationTree> {
    let out = match mv.side {
        Side::Source => apply_source_split(t, mv)?,
        Side::Sink => apply_source_split(&t.transpose(), &mv.transposed())?.transpose(),
    };
    if !is_stable(&out) {
        return Err(Error::InvalidSplit(format!("splitting {} this way is unstable", mv.vertex)));
    }
    Ok(out)
}

/// Every decomposition of `vertex`'s neighbourhood whose split is stable.
///
/// The neighbourhood is decomposed by choosing the shared neighbour and a
/// subset for `J_1`, not by permutations. Errors if no decomposition meets
/// the two inequalities, which cannot happen for a stable input.
pub fn find_valid_splits(t: &LocalizationTree, vertex: &str) -> Result<Vec<SplitMove>> {
    if !is_stable(t) {
        return Err(Error::InvalidSplit("input tree is not stable".into()));
    }
    let (side, candidates) = match t.support().locate(vertex) {
        Some((Side::Source, _)) => (Side::Source, source_candidates(t, vertex)?),
        Some((Side::Sink, _)) => {
            let moves = source_candidates(&t.transpose(), &swap_prefix(vertex))?;
            (Side::Sink, moves.iter().map(SplitMove::transposed).collect())
        }
        None => return Err(Error::InvalidSplit(format!("no vertex labeled {vertex}"))),
    };
    debug_assert!(candidates.iter().all(|c| c.side == side));
    if !candidates.iter().any(|c| c.satisfies_inequalities) {
        return Err(Error::Internal(format!(
            "no decomposition of the neighbours of {vertex} meets the split inequalities"
        )));
    }
    Ok(candidates
        .into_iter()
        .filter(|mv| apply_split(t, mv).is_ok())
        .collect())
}

/// Labels of vertices of level at least 2, sources first.
pub fn splittable_vertices(t: &LocalizationTree) -> Vec<String> {
    let q = t.support();
    q.sources()
        .iter()
        .chain(q.sinks())
        .filter(|v| v.level >= 2)
        .map(|v| v.label.clone())
        .collect()
}

#[derive(Clone, Debug)]
pub struct RefinedTarget {
    pub tree: LocalizationTree,
    /// Number of split sequences from the input ending in this shape.
    pub chains: u128,
}

/// Trivial-partition data reachable from one tree, up to isomorphism.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub targets: Vec<RefinedTarget>,
}

impl Refinement {
    pub fn contains_shape(&self, t: &LocalizationTree) -> bool {
        let code = canonical_form(t);
        self.targets.iter().any(|x| canonical_form(&x.tree) == code)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.targets
                .iter()
                .map(|x| json!({"tree": x.tree.to_document(), "chains": x.chains.to_string()}))
                .collect(),
        )
    }
}

type Reach = BTreeMap<String, (LocalizationTree, u128)>;

fn explore(t: &LocalizationTree, memo: &mut HashMap<String, Reach>) -> Result<Reach> {
    let code = canonical_form(t);
    if let Some(hit) = memo.get(&code) {
        return Ok(hit.clone());
    }
    let vertices = splittable_vertices(t);
    let mut reach = Reach::new();
    if vertices.is_empty() {
        reach.insert(code.clone(), (t.clone(), 1));
    }
    for v in vertices {
        for mv in find_valid_splits(t, &v)? {
            let next = apply_split(t, &mv)?;
            for (shape, (tree, n)) in explore(&next, memo)? {
                reach.entry(shape).or_insert((tree, 0)).1 += n;
            }
        }
    }
    memo.insert(code, reach.clone());
    Ok(reach)
}

/// Every trivial-partition localization data reachable by chains of valid
/// splits over all vertices, deduplicated up to isomorphism, with the number
/// of chains reaching each.
pub fn refine_to_trivial(t: &LocalizationTree) -> Result<Refinement> {
    if !is_stable(t) {
        return Err(Error::InvalidSplit("input tree is not stable".into()));
    }
    let reach = explore(t, &mut HashMap::new())?;
    Ok(Refinement {
        targets: reach
            .into_values()
            .map(|(tree, chains)| RefinedTarget { tree, chains })
            .collect(),
    })
}

/// One chain down to the trivial partition, always taking the first valid
/// move of the first splittable vertex.
pub fn first_chain(t: &LocalizationTree) -> Result<Vec<(SplitMove, LocalizationTree)>> {
    let mut current = t.clone();
    let mut steps = Vec::new();
    while let Some(v) = splittable_vertices(&current).into_iter().next() {
        let mv = find_valid_splits(&current, &v)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Internal(format!("no stable split of {v}")))?;
        current = apply_split(&current, &mv)?;
        steps.push((mv, current.clone()));
    }
    Ok(steps)
}

/// `[{"move": ..., "tree": ...}, ...]`
pub fn trace_to_json(steps: &[(SplitMove, LocalizationTree)]) -> Value {
    Value::Array(
        steps
            .iter()
            .map(|(mv, t)| json!({"move": mv, "tree": t.to_document()}))
            .collect(),
    )
}

/// Source bitmask helper shared with tests.
pub fn neighbour_labels(t: &LocalizationTree, source: usize) -> Vec<String> {
    bits(t.neighbourhoods()[source])
        .map(|j| t.support().sinks()[j].label.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{enumerate_partition_pairs, PartitionPair};
    use crate::quiver::SupportQuiver;
    use crate::trees::stable_spanning_trees;

    fn wp(s: &str) -> WeightedPartition {
        s.parse().unwrap()
    }

    fn tree(src: &[u32], snk: &[u32], edges: &[(&str, &str)]) -> LocalizationTree {
        let q = Arc::new(SupportQuiver::from_levels(src, snk).unwrap());
        let edges: Vec<(String, String)> =
            edges.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect();
        LocalizationTree::from_labeled_edges(q, &edges).unwrap()
    }

    /// Alternating path `j_1 − i_1 − j_2 − … − i_4 − j_5`.
    fn path() -> LocalizationTree {
        tree(
            &[1; 4],
            &[1; 5],
            &[
                ("i_1_1", "j_1_1"), ("i_1_1", "j_1_2"),
                ("i_1_2", "j_1_2"), ("i_1_2", "j_1_3"),
                ("i_1_3", "j_1_3"), ("i_1_3", "j_1_4"),
                ("i_1_4", "j_1_4"), ("i_1_4", "j_1_5"),
            ],
        )
    }

    fn example_trees() -> [LocalizationTree; 2] {
        [
            tree(
                &[1, 1, 2],
                &[1; 5],
                &[
                    ("i_1_1", "j_1_1"), ("i_1_1", "j_1_2"),
                    ("i_1_2", "j_1_2"), ("i_1_2", "j_1_3"),
                    ("i_2_1", "j_1_3"), ("i_2_1", "j_1_4"), ("i_2_1", "j_1_5"),
                ],
            ),
            tree(
                &[1, 1, 2],
                &[1; 5],
                &[
                    ("i_1_1", "j_1_1"), ("i_1_1", "j_1_2"),
                    ("i_2_1", "j_1_2"), ("i_2_1", "j_1_3"), ("i_2_1", "j_1_4"),
                    ("i_1_2", "j_1_4"), ("i_1_2", "j_1_5"),
                ],
            ),
        ]
    }

    #[test]
    fn partition_refinement() {
        assert_eq!(refine_partition_at(&wp("3*1"), 3).unwrap(), wp("1*1+2*1"));
        assert_eq!(refine_partition_at(&wp("1*2+2*1"), 2).unwrap(), wp("1*4"));
        assert_eq!(refine_partition_at(&wp("2*2"), 2).unwrap(), wp("1*2+2*1"));
        assert!(refine_partition_at(&wp("1*3"), 2).is_err());
        assert!(refine_partition_at(&wp("2*1"), 1).is_err());
    }

    #[test]
    fn three_unit_sinks_split_in_the_middle() {
        let t = &example_trees()[0];
        assert!(is_stable(t));
        let moves = find_valid_splits(t, "i_2_1").unwrap();
        assert!(!moves.is_empty());
        assert!(moves.iter().any(|m| m.shared_index == 2 && m.satisfies_inequalities));
        // l = (1,1,1), k = 2: both halves need two sinks
        for m in &moves {
            assert_eq!(m.first_part().len(), 2);
            assert_eq!(m.second_part().len(), 2);
        }
    }

    #[test]
    fn single_neighbour() {
        let t = tree(&[2], &[3], &[("i_2_1", "j_3_1")]);
        let moves = find_valid_splits(&t, "i_2_1").unwrap();
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].shared_index, 1);
        let out = apply_split(&t, &moves[0]).unwrap();
        assert_eq!(out.support().source_levels(), vec![1, 1]);
        assert_eq!(out.edges(), vec![(0, 0), (1, 0)]);
        assert!(is_stable(&out));
        assert!(find_valid_splits(&t, "j_3_1").unwrap().len() == 1);
    }

    #[test]
    fn level_one_vertices_cannot_split() {
        let t = &example_trees()[0];
        assert!(find_valid_splits(t, "i_1_1").is_err());
        assert!(find_valid_splits(t, "x").is_err());
    }

    #[test]
    fn both_example_trees_reach_the_path() {
        let target = path();
        let reached: Vec<Refinement> = example_trees()
            .iter()
            .map(|t| refine_to_trivial(t).unwrap())
            .collect();
        for r in &reached {
            assert!(r.contains_shape(&target));
            assert!(r.targets.iter().all(|x| is_stable(&x.tree)));
        }
        // the first tree reaches it with the original labels
        let t = &example_trees()[0];
        let hit = find_valid_splits(t, "i_2_1")
            .unwrap()
            .into_iter()
            .map(|mv| apply_split(t, &mv).unwrap())
            .any(|u| u == target);
        assert!(hit);
    }

    #[test]
    fn trivial_input_is_its_own_refinement() {
        let r = refine_to_trivial(&path()).unwrap();
        assert_eq!(r.targets.len(), 1);
        assert_eq!(r.targets[0].tree, path());
        assert_eq!(r.targets[0].chains, 1);
    }

    #[test]
    fn bookkeeping() {
        for (a, b) in [(2u32, 3u32), (3, 4), (2, 5)] {
            for pair in enumerate_partition_pairs(a, b).unwrap() {
                let q = SupportQuiver::from_pair(&pair);
                for t in stable_spanning_trees(&q) {
                    for v in splittable_vertices(&t) {
                        let moves = find_valid_splits(&t, &v).unwrap();
                        assert!(!moves.is_empty(), "{pair} {v}");
                        for mv in moves {
                            let u = apply_split(&t, &mv).unwrap();
                            let (p, r) = (t.support(), u.support());
                            assert_eq!((p.theta(), p.kappa()), (r.theta(), r.kappa()));
                            assert_eq!(r.vertices(mv.side).len(), p.vertices(mv.side).len() + 1);
                            assert_eq!(u.edges().len(), t.edges().len() + 1);
                            let other = mv.side.other();
                            assert_eq!(r.vertices(other), p.vertices(other));
                            let expect = match mv.side {
                                Side::Source => PartitionPair::new(
                                    refine_partition_at(&p.source_partition(), mv.level).unwrap(),
                                    p.sink_partition(),
                                ),
                                Side::Sink => PartitionPair::new(
                                    p.source_partition(),
                                    refine_partition_at(&p.sink_partition(), mv.level).unwrap(),
                                ),
                            };
                            assert_eq!(r.partition_pair(), expect);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trace_json() {
        let steps = first_chain(&example_trees()[1]).unwrap();
        assert_eq!(steps.len(), 1);
        let v = trace_to_json(&steps);
        assert_eq!(v[0]["move"]["side"], "source");
        assert_eq!(v[0]["move"]["vertex"], "i_2_1");
        assert_eq!(neighbour_labels(&steps[0].1, 0), vec!["j_1_1", "j_1_2"]);
    }
}
