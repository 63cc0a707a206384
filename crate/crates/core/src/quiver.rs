//! Levelled bipartite support quivers, slope and King stability forms, and
//! the Kronecker quiver `K(m)` formulas.
//!
//! A support quiver has labeled sources and sinks, each with a positive level
//! `l`. Between a source of level `p` and a sink of level `q` there are
//! `m·p·q` parallel arrows, where `m` is kept symbolic unless an operation
//! takes it as an argument.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{PartitionPair, WeightedPartition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Sink,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Source => Side::Sink,
            Side::Sink => Side::Source,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Side::Source => "i",
            Side::Sink => "j",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub level: u32,
}

/// Complete bipartite levelled quiver `Q(Σ l·a_l, Σ l·b_l)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SupportDocument", into = "SupportDocument")]
pub struct SupportQuiver {
    sources: Vec<Vertex>,
    sinks: Vec<Vertex>,
}

#[derive(Serialize, Deserialize)]
struct SupportDocument {
    sources: Vec<Vertex>,
    sinks: Vec<Vertex>,
}

impl TryFrom<SupportDocument> for SupportQuiver {
    type Error = Error;

    fn try_from(doc: SupportDocument) -> Result<Self> {
        SupportQuiver::new(doc.sources, doc.sinks)
    }
}

impl From<SupportQuiver> for SupportDocument {
    fn from(q: SupportQuiver) -> Self {
        SupportDocument { sources: q.sources, sinks: q.sinks }
    }
}

/// Standard labels: the `k`-th vertex of level `l` is `i_l_k` (or `j_l_k`).
fn standard_vertices(side: Side, levels: &[u32]) -> Vec<Vertex> {
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    let mut seen: HashMap<u32, u32> = HashMap::new();
    sorted
        .into_iter()
        .map(|level| {
            let k = seen.entry(level).or_insert(0);
            *k += 1;
            Vertex { label: format!("{}_{}_{}", side.prefix(), level, k), level }
        })
        .collect()
}

impl SupportQuiver {
    pub fn new(sources: Vec<Vertex>, sinks: Vec<Vertex>) -> Result<Self> {
        if sources.is_empty() || sinks.is_empty() {
            return Err(Error::InvalidArgument(
                "a support quiver needs at least one source and one sink".into(),
            ));
        }
        let mut labels = HashSet::new();
        for v in sources.iter().chain(&sinks) {
            if v.level == 0 {
                return Err(Error::InvalidArgument(format!("vertex {} has level 0", v.label)));
            }
            if !labels.insert(v.label.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate label {}", v.label)));
            }
        }
        if sources.len() > 64 || sinks.len() > 64 {
            return Err(Error::InvalidArgument("at most 64 vertices per side".into()));
        }
        Ok(Self { sources, sinks })
    }

    /// Sources and sinks with standard labels, sorted by level.
    pub fn from_levels(source_levels: &[u32], sink_levels: &[u32]) -> Result<Self> {
        Self::new(
            standard_vertices(Side::Source, source_levels),
            standard_vertices(Side::Sink, sink_levels),
        )
    }

    pub fn from_pair(pair: &PartitionPair) -> Self {
        Self::from_levels(&pair.source.levels(), &pair.sink.levels())
            .expect("partitions give valid levels")
    }

    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    pub fn sinks(&self) -> &[Vertex] {
        &self.sinks
    }

    pub fn vertices(&self, side: Side) -> &[Vertex] {
        match side {
            Side::Source => &self.sources,
            Side::Sink => &self.sinks,
        }
    }

    pub fn source_levels(&self) -> Vec<u32> {
        self.sources.iter().map(|v| v.level).collect()
    }

    pub fn sink_levels(&self) -> Vec<u32> {
        self.sinks.iter().map(|v| v.level).collect()
    }

    pub fn source_partition(&self) -> WeightedPartition {
        WeightedPartition::from_parts(&self.source_levels()).expect("non-empty")
    }

    pub fn sink_partition(&self) -> WeightedPartition {
        WeightedPartition::from_parts(&self.sink_levels()).expect("non-empty")
    }

    pub fn partition_pair(&self) -> PartitionPair {
        PartitionPair::new(self.source_partition(), self.sink_partition())
    }

    /// `Θ` of the all-ones dimension vector: total source weight.
    pub fn theta(&self) -> u64 {
        self.sources.iter().map(|v| v.level as u64).sum()
    }

    /// `κ` of the all-ones dimension vector: total weight.
    pub fn kappa(&self) -> u64 {
        self.theta() + self.sinks.iter().map(|v| v.level as u64).sum::<u64>()
    }

    pub fn locate(&self, label: &str) -> Option<(Side, usize)> {
        if let Some(i) = self.sources.iter().position(|v| v.label == label) {
            return Some((Side::Source, i));
        }
        self.sinks
            .iter()
            .position(|v| v.label == label)
            .map(|j| (Side::Sink, j))
    }

    pub fn level_of(&self, label: &str) -> Option<u32> {
        self.locate(label).map(|(side, idx)| self.vertices(side)[idx].level)
    }

    /// Swaps the roles of sources and sinks, renaming `i_*` ↔ `j_*`.
    pub fn transpose(&self) -> Self {
        let swap = |v: &Vertex| Vertex { label: swap_prefix(&v.label), level: v.level };
        Self {
            sources: self.sinks.iter().map(swap).collect(),
            sinks: self.sources.iter().map(swap).collect(),
        }
    }

    /// Memoization key: sorted source levels and sorted sink levels.
    pub fn signature(&self) -> (Vec<u32>, Vec<u32>) {
        let mut s = self.source_levels();
        let mut t = self.sink_levels();
        s.sort_unstable();
        t.sort_unstable();
        (s, t)
    }

    /// Whether some nonzero proper vertex subset has the same slope as the
    /// whole quiver (all-ones dimension vector). If so, stability and
    /// semistability differ and the tree census is not meaningful.
    pub fn has_slope_collision(&self) -> bool {
        let theta = self.theta();
        let kappa = self.kappa();
        // reachable (source weight, sink weight) sums over vertex subsets
        let mut sums: HashSet<(u64, u64)> = HashSet::from([(0, 0)]);
        for v in &self.sources {
            let next: Vec<_> = sums.iter().map(|(s, t)| (s + v.level as u64, *t)).collect();
            sums.extend(next);
        }
        for v in &self.sinks {
            let next: Vec<_> = sums.iter().map(|(s, t)| (*s, t + v.level as u64)).collect();
            sums.extend(next);
        }
        sums.into_iter().any(|(s, t)| {
            let k = s + t;
            k > 0 && k < kappa && s * kappa == theta * k
        })
    }
}

pub(crate) fn swap_prefix(label: &str) -> String {
    if let Some(rest) = label.strip_prefix('i') {
        format!("j{rest}")
    } else if let Some(rest) = label.strip_prefix('j') {
        format!("i{rest}")
    } else {
        label.to_string()
    }
}

/// Dimension vector on the labeled vertices of a support quiver.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimVector(pub BTreeMap<String, u64>);

impl DimVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: &str, value: u64) -> Self {
        self.set(label, value);
        self
    }

    pub fn set(&mut self, label: &str, value: u64) {
        if value == 0 {
            self.0.remove(label);
        } else {
            self.0.insert(label.to_string(), value);
        }
    }

    pub fn get(&self, label: &str) -> u64 {
        self.0.get(label).copied().unwrap_or(0)
    }

    pub fn all_ones(q: &SupportQuiver) -> Self {
        let mut d = Self::new();
        for v in q.sources().iter().chain(q.sinks()) {
            d.set(&v.label, 1);
        }
        d
    }
}

/// Level-weighted (source part, sink part) of `d`: `(Θ(d), κ(d) − Θ(d))`.
fn weighted_parts(d: &DimVector, q: &SupportQuiver) -> (BigInt, BigInt) {
    let side_sum = |vs: &[Vertex]| -> BigInt {
        vs.iter()
            .map(|v| BigInt::from(v.level) * BigInt::from(d.get(&v.label)))
            .sum()
    };
    (side_sum(q.sources()), side_sum(q.sinks()))
}

/// `μ(d) = Θ(d)/κ(d)`.
pub fn slope(d: &DimVector, q: &SupportQuiver) -> Result<BigRational> {
    let (theta, rest) = weighted_parts(d, q);
    let kappa = &theta + rest;
    if kappa.is_zero() {
        return Err(Error::InvalidArgument("slope of a zero dimension vector".into()));
    }
    Ok(BigRational::new(theta, kappa))
}

/// Euler form `⟨d,e⟩ = Σ_q d_q e_q − Σ_{α: i→j} d_i e_j` on the support
/// quiver with `m·l(i)·l(j)` arrows from `i` to `j`.
pub fn support_euler_form(d: &DimVector, e: &DimVector, q: &SupportQuiver, m: u64) -> BigInt {
    let diag: BigInt = q
        .sources()
        .iter()
        .chain(q.sinks())
        .map(|v| BigInt::from(d.get(&v.label)) * e.get(&v.label))
        .sum();
    let mut arrows = BigInt::zero();
    for i in q.sources() {
        for j in q.sinks() {
            let count = BigInt::from(m) * i.level * j.level;
            arrows += count * d.get(&i.label) * e.get(&j.label);
        }
    }
    diag - arrows
}

/// King form `Θ_d(e) = ⟨e,d⟩ − ⟨d,e⟩`, computed by the factored expression
/// `m·(Σ_i l(i)d_i · Σ_j l(j)e_j − Σ_i l(i)e_i · Σ_j l(j)d_j)`.
///
/// Positive exactly when `μ(e) < μ(d)`, so a representation of dimension
/// `d` is stable iff the form is positive on every proper subrepresentation.
pub fn king_theta(d: &DimVector, e: &DimVector, q: &SupportQuiver, m: u64) -> BigInt {
    let (d_src, d_snk) = weighted_parts(d, q);
    let (e_src, e_snk) = weighted_parts(e, q);
    BigInt::from(m) * (d_src * e_snk - e_src * d_snk)
}

/// Euler form of `K(m)` on `(d_i, d_j)` and `(e_i, e_j)`.
pub fn euler_form(d: (u64, u64), e: (u64, u64), m: u64) -> BigInt {
    BigInt::from(d.0) * e.0 + BigInt::from(d.1) * e.1 - BigInt::from(m) * d.0 * e.1
}

/// `(m − √(m²−4))/2 < b/a < (m + √(m²−4))/2`, evaluated as the equivalent
/// integer inequality `a² + b² < m·a·b`.
pub fn is_imaginary_schur_root(a: u64, b: u64, m: u64) -> bool {
    let (a, b, m) = (a as u128, b as u128, m as u128);
    a * a + b * b < m * a * b
}

/// `dim M^s_{a,b}(K(m)) = 1 − a² − b² + a·b·m`.
pub fn moduli_dimension(a: u64, b: u64, m: u64) -> i64 {
    let (a, b, m) = (a as i64, b as i64, m as i64);
    1 - a * a - b * b + a * b * m
}

/// Transpose image `(b, a)` and reflection image `(a, m·a − b)`.
pub fn dualities(a: u64, b: u64, m: u64) -> Result<((u64, u64), (u64, u64))> {
    let ma = m * a;
    if b > ma {
        return Err(Error::InvalidArgument(format!(
            "reflection of ({a}, {b}) needs b <= m*a = {ma}"
        )));
    }
    Ok(((b, a), (a, ma - b)))
}

/// For `K(m)` with trivial levels, Θ-coprimality of `(a, b)` is `gcd(a, b) = 1`.
pub fn is_theta_coprime(a: u64, b: u64) -> bool {
    a.gcd(&b) == 1
}
