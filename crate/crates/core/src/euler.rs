//! Euler characteristics of Kronecker moduli spaces.
//!
//! `χ(M^s_{a,b}(K(m)))` is the sum over partition pairs of `(a, b)` of the
//! degeneration coefficient times `χ` of the split moduli space, and the
//! latter is `m^{â+b̂−1}·Σ v(t)` over the stable labeled spanning trees `t`
//! of the pair's support quiver. Everything is exact.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{factorial, rational_to_string, RationalPolynomial};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partition_pairs, mps_coefficient, PartitionPair};
use crate::quiver::{is_imaginary_schur_root, is_theta_coprime, SupportQuiver};
use crate::trees::{
    automorphism_weight, canonical_form, cayley_count, stable_spanning_trees, stable_weight_census,
    CensusMode, CensusStats, CensusSummary,
};

type Signature = (Vec<u32>, Vec<u32>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Kronecker { a: u32, b: u32 },
    Pair(PartitionPair),
}

/// One term of the degeneration sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub pair: PartitionPair,
    pub coefficient: BigRational,
    /// `χ` of the split moduli space: a monomial `c·m^{â+b̂−1}`.
    pub chi_pair: RationalPolynomial,
    pub stats: CensusStats,
}

impl Summand {
    /// `coefficient · chi_pair`
    pub fn contribution(&self) -> RationalPolynomial {
        self.chi_pair.scale(&self.coefficient)
    }
}

#[derive(Clone, Debug)]
pub struct ChiResult {
    pub query: Query,
    pub chi: RationalPolynomial,
    /// Per-pair terms in partition enumeration order; a single entry with
    /// coefficient 1 for a pair query.
    pub summands: Vec<Summand>,
    pub stats: CensusStats,
    pub elapsed: Duration,
    pub warnings: Vec<String>,
}

impl ChiResult {
    /// JSON document. Timing is left out unless asked for so the output is
    /// reproducible.
    pub fn to_json(&self, with_timing: bool) -> Value {
        let mut doc = serde_json::Map::new();
        match &self.query {
            Query::Kronecker { a, b } => {
                doc.insert("a".into(), json!(a));
                doc.insert("b".into(), json!(b));
            }
            Query::Pair(pair) => {
                doc.insert("pair".into(), json!(pair.to_string()));
            }
        }
        doc.insert("chi".into(), self.chi.to_json_value());
        doc.insert(
            "summands".into(),
            Value::Array(
                self.summands
                    .iter()
                    .map(|s| {
                        json!({
                            "pair": s.pair.to_string(),
                            "coefficient": rational_to_string(&s.coefficient),
                            "chi_pair": s.chi_pair.to_string(),
                            "contribution": s.contribution().to_string(),
                        })
                    })
                    .collect(),
            ),
        );
        doc.insert("stats".into(), serde_json::to_value(self.stats).expect("plain struct"));
        if with_timing {
            doc.insert("elapsed_ms".into(), json!(self.elapsed.as_secs_f64() * 1e3));
        }
        Value::Object(doc)
    }
}

/// Runs tree censuses and memoizes their stable weight sums by support
/// signature (sorted source levels, sorted sink levels).
pub struct Engine {
    cache: Mutex<HashMap<Signature, CensusSummary>>,
    budget: Option<u128>,
    mode: CensusMode,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Self { cache: Mutex::new(HashMap::new()), budget: None, mode: CensusMode::Stable }
    }

    /// Refuse censuses whose support has more than `budget` labeled
    /// spanning trees.
    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_mode(mut self, mode: CensusMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn budget(&self) -> Option<u128> {
        self.budget
    }

    pub fn check_budget(&self, sources: usize, sinks: usize) -> Result<()> {
        let Some(budget) = self.budget else {
            return Ok(());
        };
        let estimate = cayley_count(sources as u64, sinks as u64);
        if estimate > BigInt::from(budget) {
            return Err(Error::BudgetExceeded { estimate: estimate.to_string(), budget });
        }
        Ok(())
    }

    pub fn cached_signatures(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Stable weight sum of a support quiver, from cache when available.
    pub fn census(&self, q: &SupportQuiver) -> Result<CensusSummary> {
        let key = q.signature();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        self.check_budget(q.sources().len(), q.sinks().len())?;
        if q.has_slope_collision() {
            return Err(Error::InvalidArgument(format!(
                "support with levels {:?} / {:?} is not slope-coprime",
                key.0, key.1
            )));
        }
        // the census only depends on the signature, so run it on the
        // canonically labeled quiver
        let canonical = SupportQuiver::from_levels(&key.0, &key.1)?;
        let summary = stable_weight_census(&canonical, self.mode);
        // concurrent workers may race here; they insert equal values
        self.cache
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| summary.clone());
        Ok(summary)
    }

    fn pair_summand(&self, pair: &PartitionPair, coefficient: BigRational) -> Result<Summand> {
        let q = SupportQuiver::from_pair(pair);
        let summary = self.census(&q)?;
        let exponent = (pair.source.hat() + pair.sink.hat() - 1) as u32;
        Ok(Summand {
            pair: pair.clone(),
            coefficient,
            chi_pair: RationalPolynomial::monomial(exponent, BigRational::from_integer(summary.weight_sum)),
            stats: summary.stats,
        })
    }

    /// `χ(M^s_{(a,b)‾}(N_m)) = m^{â+b̂−1}·Σ_{stable t} v(t)`.
    pub fn chi_partition_pair(&self, pair: &PartitionPair) -> Result<ChiResult> {
        let start = Instant::now();
        let summand = self.pair_summand(pair, BigRational::one())?;
        Ok(ChiResult {
            query: Query::Pair(pair.clone()),
            chi: summand.chi_pair.clone(),
            stats: summand.stats,
            summands: vec![summand],
            elapsed: start.elapsed(),
            warnings: Vec::new(),
        })
    }

    /// `χ(M^s_{a,b}(K(m)))` as a polynomial in `m`.
    pub fn chi_kronecker(&self, a: u32, b: u32) -> Result<ChiResult> {
        let start = Instant::now();
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument("a and b must be positive".into()));
        }
        if !is_theta_coprime(a as u64, b as u64) {
            return Err(Error::NotCoprime { a: a as u64, b: b as u64 });
        }
        // the trivial pair has the largest support
        self.check_budget(a as usize, b as usize)?;
        let mut warnings = Vec::new();
        if let Some(m0) = first_root_arrow_count(a as u64, b as u64) {
            if m0 > 3 {
                warnings.push(format!(
                    "({a}, {b}) is an imaginary Schur root only for m >= {m0}"
                ));
            }
        }
        let pairs = enumerate_partition_pairs(a, b)?;
        // largest supports first so the pool stays busy
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by_key(|&k| {
            std::cmp::Reverse(cayley_count(pairs[k].source.hat(), pairs[k].sink.hat()))
        });
        let computed: Vec<(usize, Summand)> = order
            .par_iter()
            .map(|&k| {
                let pair = &pairs[k];
                self.pair_summand(pair, mps_coefficient(pair)).map(|s| (k, s))
            })
            .collect::<Result<_>>()?;
        let mut by_index: BTreeMap<usize, Summand> = computed.into_iter().collect();
        let summands: Vec<Summand> = (0..pairs.len())
            .map(|k| by_index.remove(&k).expect("every pair computed"))
            .collect();
        let mut chi = RationalPolynomial::zero();
        let mut stats = CensusStats::default();
        for s in &summands {
            chi += &s.contribution();
            stats += s.stats;
        }
        Ok(ChiResult {
            query: Query::Kronecker { a, b },
            chi,
            summands,
            stats,
            elapsed: start.elapsed(),
            warnings,
        })
    }
}

/// Smallest `m` with `a² + b² < m·a·b`.
fn first_root_arrow_count(a: u64, b: u64) -> Option<u64> {
    let num = a * a + b * b;
    let den = a * b;
    Some(num / den + 1).filter(|m| is_imaginary_schur_root(a, b, *m))
}

fn default_engine() -> &'static Engine {
    static ENGINE: OnceLock<Engine> = OnceLock::new();
    ENGINE.get_or_init(Engine::new)
}

/// [`Engine::chi_partition_pair`] on a shared unbounded engine.
pub fn chi_partition_pair(pair: &PartitionPair) -> Result<ChiResult> {
    default_engine().chi_partition_pair(pair)
}

/// [`Engine::chi_kronecker`] on a shared unbounded engine.
pub fn chi_kronecker(a: u32, b: u32) -> Result<ChiResult> {
    default_engine().chi_kronecker(a, b)
}

fn check_ak(a: u32, k: u32) -> Result<()> {
    if a == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!("need a, k >= 1, got a = {a}, k = {k}")));
    }
    Ok(())
}

/// Labeled spanning trees of `K_{a, ka+1}` in which every source has exactly
/// `k+1` neighbours: `(ka)!/(ka+1) · ((ka+1)/k!)^a`.
pub fn labeled_stable_tree_count(a: u32, k: u32) -> Result<BigInt> {
    check_ak(a, k)?;
    let ka = a as u64 * k as u64;
    let num = factorial(ka) * BigInt::from(ka + 1).pow(a - 1);
    let den = factorial(k as u64).pow(a);
    if !(&num % &den).is_zero() {
        return Err(Error::Internal(format!("tree count for a = {a}, k = {k} is not an integer")));
    }
    Ok(num / den)
}

/// `χ(M^s_{(1·a, 1·(ka+1))}(N_m)) = m^{(k+1)a} · (ka)!/(ka+1) · ((ka+1)/k!)^a`.
pub fn chi_trivial_aka_closed_form(a: u32, k: u32) -> Result<RationalPolynomial> {
    let count = labeled_stable_tree_count(a, k)?;
    Ok(RationalPolynomial::monomial((k + 1) * a, BigRational::from_integer(count)))
}

/// Automorphism-weighted count of unlabeled stable trees for
/// `(1·a, 1·(ka+1))`: `1/(ka+1)² · 1/a! · ((ka+1)/k!)^a`.
pub fn t_weight_sum_closed_form(a: u32, k: u32) -> Result<BigRational> {
    check_ak(a, k)?;
    let t = BigInt::from(a as u64 * k as u64 + 1);
    let num = t.pow(a);
    let den = t.pow(2) * factorial(a as u64) * factorial(k as u64).pow(a);
    Ok(BigRational::new(num, den))
}

/// The same weighted count from the census: stable labeled trees are
/// grouped into isomorphism classes and each class contributes `1/|Aut|`.
pub fn t_weight_sum_census(a: u32, k: u32) -> Result<BigRational> {
    check_ak(a, k)?;
    let q = SupportQuiver::from_pair(&PartitionPair::trivial(a, k * a + 1));
    let mut shapes = HashMap::new();
    for t in stable_spanning_trees(&q) {
        shapes.entry(canonical_form(&t)).or_insert(t);
    }
    Ok(shapes
        .values()
        .map(automorphism_weight)
        .fold(BigRational::zero(), |acc, w| acc + w))
}
