//! Canonical encodings of unlabeled levelled trees and their automorphism
//! groups (level- and side-preserving).
//!
//! Every automorphism fixes the tree's center. A bicenter is an edge between
//! a source and a sink and cannot be flipped, so rooting at the source end
//! (or at the single center) gives a root fixed by the whole group. The
//! group order is then the product over all vertices of `c!` for every class
//! of `c` isomorphic child subtrees.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::LocalizationTree;
use crate::algebra::factorial;

struct Graph {
    adj: Vec<Vec<usize>>,
    tag: Vec<String>,
    sources: usize,
}

impl Graph {
    fn of(t: &LocalizationTree) -> Self {
        let q = t.support();
        let a = q.sources().len();
        let n = a + q.sinks().len();
        let mut adj = vec![Vec::new(); n];
        for (i, j) in t.edges() {
            adj[i].push(a + j);
            adj[a + j].push(i);
        }
        let tag = q
            .sources()
            .iter()
            .map(|v| format!("i{}", v.level))
            .chain(q.sinks().iter().map(|v| format!("j{}", v.level)))
            .collect();
        Self { adj, tag, sources: a }
    }

    fn root(&self) -> usize {
        let n = self.adj.len();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
        let mut remaining = n;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &v in &layer {
                degree[v] = 0;
                for &u in &self.adj[v] {
                    if degree[u] > 0 {
                        degree[u] -= 1;
                        if degree[u] == 1 {
                            next.push(u);
                        }
                    }
                }
            }
            layer = next;
        }
        // one or two centers left; prefer a source
        *layer
            .iter()
            .min_by_key(|&&v| (v >= self.sources, v))
            .expect("non-empty tree")
    }

    /// Returns the canonical code of the subtree at `v` and multiplies the
    /// automorphism count of that subtree into `aut`.
    fn encode(&self, v: usize, parent: Option<usize>, aut: &mut BigInt) -> String {
        let mut children: Vec<String> = self.adj[v]
            .iter()
            .filter(|&&u| Some(u) != parent)
            .map(|&u| self.encode(u, Some(v), aut))
            .collect();
        children.sort_unstable();
        let mut run = 1u64;
        for w in children.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                *aut *= factorial(run);
                run = 1;
            }
        }
        *aut *= factorial(run);
        format!("{}({})", self.tag[v], children.concat())
    }
}

fn analyse(t: &LocalizationTree) -> (String, BigInt) {
    let g = Graph::of(t);
    let mut aut = BigInt::one();
    let code = g.encode(g.root(), None, &mut aut);
    (code, aut)
}

/// Code shared by exactly the trees that are isomorphic through a level-
/// and side-preserving relabeling.
pub fn canonical_form(t: &LocalizationTree) -> String {
    analyse(t).0
}

pub fn automorphism_count(t: &LocalizationTree) -> BigInt {
    analyse(t).1
}

/// `w(t) = 1/|Aut(t)|`.
pub fn automorphism_weight(t: &LocalizationTree) -> BigRational {
    BigRational::new(BigInt::one(), automorphism_count(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::SupportQuiver;
    use crate::trees::enumerate_spanning_trees;
    use std::collections::HashMap;
    use std::sync::Arc;

    #[test]
    fn orbit_stabilizer_on_complete_bipartite_trees() {
        // labeled trees grouped by shape: |orbit| · |Aut| = a!·b!
        for (a, b) in [(2usize, 3usize), (3, 3), (2, 4), (3, 4)] {
            let q = SupportQuiver::from_levels(&vec![1; a], &vec![1; b]).unwrap();
            let mut orbits: HashMap<String, (u64, BigInt)> = HashMap::new();
            for t in enumerate_spanning_trees(&q) {
                let (code, aut) = analyse(&t);
                let e = orbits.entry(code).or_insert((0, aut.clone()));
                assert_eq!(e.1, aut);
                e.0 += 1;
            }
            let group = factorial(a as u64) * factorial(b as u64);
            for (code, (size, aut)) in orbits {
                assert_eq!(BigInt::from(size) * aut, group, "{code}");
            }
        }
    }

    #[test]
    fn relabeling_keeps_the_code() {
        let q = Arc::new(SupportQuiver::from_levels(&[1, 1, 2], &[1, 1, 1, 2]).unwrap());
        let t = LocalizationTree::new(q.clone(), &[(0, 0), (0, 1), (1, 1), (1, 3), (2, 2), (2, 3)]).unwrap();
        // swap the two level-1 sources
        let u = LocalizationTree::new(q, &[(1, 0), (1, 1), (0, 1), (0, 3), (2, 2), (2, 3)]).unwrap();
        assert_eq!(canonical_form(&t), canonical_form(&u));
    }
}
