//! Weighted partitions `a = Σ l·a_l`, the degeneration coefficients attached
//! to a pair of them, and a few counting identities used by the bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::float::{Constant, Round};
use rug::ops::{DivAssignRound, MulAssignRound};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, factorial};
use crate::bounds::PRECISION;
use crate::error::{Error, Result};

/// A partition stored as part size `l` ↦ multiplicity `a_l`. Absent sizes
/// have multiplicity zero and are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PartitionDocument", into = "PartitionDocument")]
pub struct WeightedPartition {
    parts: BTreeMap<u32, u32>,
}

#[derive(Serialize, Deserialize)]
struct PartitionDocument {
    parts: BTreeMap<u32, u32>,
}

impl TryFrom<PartitionDocument> for WeightedPartition {
    type Error = Error;

    fn try_from(doc: PartitionDocument) -> Result<Self> {
        WeightedPartition::new(doc.parts)
    }
}

impl From<WeightedPartition> for PartitionDocument {
    fn from(p: WeightedPartition) -> Self {
        PartitionDocument { parts: p.parts }
    }
}

impl WeightedPartition {
    /// Zero multiplicities are dropped; a zero part size or an empty
    /// partition is rejected.
    pub fn new(parts: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (size, mult) in parts {
            if size == 0 {
                return Err(Error::InvalidArgument("part sizes must be positive".into()));
            }
            if mult > 0 {
                *map.entry(size).or_insert(0) += mult;
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidArgument("a partition needs at least one part".into()));
        }
        Ok(Self { parts: map })
    }

    /// `1·n`, every part of size one.
    pub fn trivial(n: u32) -> Self {
        assert!(n > 0, "trivial partition of zero");
        Self { parts: BTreeMap::from([(1, n)]) }
    }

    /// Builds the partition from a list of part sizes.
    pub fn from_parts(sizes: &[u32]) -> Result<Self> {
        Self::new(sizes.iter().map(|&s| (s, 1)))
    }

    /// `a = Σ l·a_l`
    pub fn total(&self) -> u64 {
        self.parts.iter().map(|(l, m)| *l as u64 * *m as u64).sum()
    }

    /// `â = Σ a_l`, the number of parts.
    pub fn hat(&self) -> u64 {
        self.parts.values().map(|m| *m as u64).sum()
    }

    /// `ã = a − â`
    pub fn tilde(&self) -> u64 {
        self.total() - self.hat()
    }

    pub fn multiplicity(&self, size: u32) -> u32 {
        self.parts.get(&size).copied().unwrap_or(0)
    }

    /// `(size, multiplicity)` pairs in increasing size.
    pub fn parts(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.parts.iter().map(|(l, m)| (*l, *m))
    }

    /// Every part listed once per multiplicity, ascending. These are the
    /// vertex levels of the support quiver.
    pub fn levels(&self) -> Vec<u32> {
        self.parts
            .iter()
            .flat_map(|(l, m)| std::iter::repeat(*l).take(*m as usize))
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.keys().all(|&l| l == 1)
    }

    pub fn max_part(&self) -> u32 {
        *self.parts.keys().next_back().expect("partitions are non-empty")
    }

    pub(crate) fn parts_map(&self) -> &BTreeMap<u32, u32> {
        &self.parts
    }
}

impl fmt::Display for WeightedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, m) in self.parts() {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            write!(f, "{l}*{m}")?;
        }
        Ok(())
    }
}

impl FromStr for WeightedPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected a partition like \"1*2+2*1\", got {s:?}"));
        let mut parts = Vec::new();
        for term in s.trim().split('+') {
            let (l, m) = term.split_once('*').ok_or_else(bad)?;
            let l: u32 = l.trim().parse().map_err(|_| bad())?;
            let m: u32 = m.trim().parse().map_err(|_| bad())?;
            if l == 0 || m == 0 {
                return Err(bad());
            }
            parts.push((l, m));
        }
        Self::new(parts)
    }
}

/// A source partition of `a` and a sink partition of `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionPair {
    pub source: WeightedPartition,
    pub sink: WeightedPartition,
}

impl PartitionPair {
    pub fn new(source: WeightedPartition, sink: WeightedPartition) -> Self {
        Self { source, sink }
    }

    pub fn trivial(a: u32, b: u32) -> Self {
        Self::new(WeightedPartition::trivial(a), WeightedPartition::trivial(b))
    }

    pub fn is_trivial(&self) -> bool {
        self.source.is_trivial() && self.sink.is_trivial()
    }
}

impl fmt::Display for PartitionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.source, self.sink)
    }
}

/// All weighted partitions of `a`, ordered lexicographically by their
/// ascending part lists: `3 ↦ [1,1,1], [1,2], [3]`.
pub fn enumerate_partitions(a: u32) -> Result<Vec<WeightedPartition>> {
    if a < 1 {
        return Err(Error::InvalidArgument("can only partition positive integers".into()));
    }
    fn rec(remaining: u32, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<WeightedPartition>) {
        if remaining == 0 {
            out.push(WeightedPartition::from_parts(prefix).expect("non-empty prefix"));
            return;
        }
        for part in min..=remaining {
            // the rest must still fit in parts no smaller than `part`
            if remaining - part != 0 && remaining - part < part {
                continue;
            }
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(a, 1, &mut Vec::new(), &mut out);
    Ok(out)
}

/// Every `(source, sink)` pair of partitions of `a` and `b`, source-major.
pub fn enumerate_partition_pairs(a: u32, b: u32) -> Result<Vec<PartitionPair>> {
    let sources = enumerate_partitions(a)?;
    let sinks = enumerate_partitions(b)?;
    Ok(sources
        .iter()
        .flat_map(|s| sinks.iter().map(move |t| PartitionPair::new(s.clone(), t.clone())))
        .collect())
}

/// `∏_l (−1)^{k_l(l−1)} / (k_l! · l^{2k_l})` for one vertex.
pub fn vertex_coefficient(p: &WeightedPartition) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (l, k) in p.parts() {
        if (k as u64 * (l as u64 - 1)) % 2 == 1 {
            num = -num;
        }
        den *= factorial(k as u64) * BigInt::from(l).pow(2 * k);
    }
    BigRational::new(num, den)
}

/// The degeneration coefficient of a partition pair: the product of the two
/// vertex coefficients.
pub fn mps_coefficient(pair: &PartitionPair) -> BigRational {
    vertex_coefficient(&pair.source) * vertex_coefficient(&pair.sink)
}

/// `C(a−1, â−1)`, the number of compositions of `a` into `â` positive parts.
pub fn composition_count(a: u32, a_hat: u32) -> Result<BigInt> {
    check_composition_args(a, a_hat)?;
    Ok(binomial(a as u64 - 1, a_hat as i64 - 1))
}

/// `Σ â!/∏ a_l!` over the partitions of `a` with exactly `â` parts. Equals
/// [`composition_count`]; exposed so the identity can be checked.
pub fn composition_multinomial_sum(a: u32, a_hat: u32) -> Result<BigInt> {
    check_composition_args(a, a_hat)?;
    let hat_fact = factorial(a_hat as u64);
    let mut sum = BigInt::zero();
    for p in enumerate_partitions(a)? {
        if p.hat() != a_hat as u64 {
            continue;
        }
        let den = p
            .parts()
            .fold(BigInt::one(), |acc, (_, m)| acc * factorial(m as u64));
        sum += &hat_fact / den;
    }
    Ok(sum)
}

fn check_composition_args(a: u32, a_hat: u32) -> Result<()> {
    if a < 1 || a_hat < 1 || a_hat > a {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= a_hat <= a, got a = {a}, a_hat = {a_hat}"
        )));
    }
    Ok(())
}

/// `exp(π·√(2a/3))`, rounded up, as an upper bound for `p(a)`.
pub fn partition_count_bound(a: u32) -> Float {
    let mut x = Float::with_val_round(PRECISION, 2 * a, Round::Up).0;
    x.div_assign_round(3u32, Round::Up);
    x.sqrt_round(Round::Up);
    let pi = Float::with_val_round(PRECISION, Constant::Pi, Round::Up).0;
    x.mul_assign_round(&pi, Round::Up);
    x.exp_round(Round::Up);
    x
}
