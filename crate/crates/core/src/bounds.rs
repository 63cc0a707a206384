//! Upper bounds for Kronecker Euler characteristics and the asymptotic
//! comparison functions `f_m`, `g_m`, `h_m = g_m/f_m` and `i_m`.
//!
//! Bounds are evaluated in MPFR with every operation rounded towards
//! `+∞`, so `χ ≤ bound` verdicts against exact rationals are sound. The
//! comparison functions are evaluated at the same precision with
//! round-to-nearest and reported as `f64`. `f_m` is the conjectured limit
//! and is only ever displayed or compared with the other functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, Pow};
use rug::{Float, Integer};

use crate::algebra::{factorial, rational_to_string, RationalPolynomial};
use crate::error::{Error, Result};
use crate::euler::Engine;
use crate::partitions::PartitionPair;
use crate::quiver::{is_imaginary_schur_root, is_theta_coprime, moduli_dimension};
use crate::trees::cayley_count;

/// Mantissa bits for every MPFR evaluation.
pub const PRECISION: u32 = 128;

pub fn to_rug_integer(x: &BigInt) -> Integer {
    Integer::from_str_radix(&x.to_str_radix(16), 16).expect("hex digits")
}

pub fn to_rug_rational(x: &BigRational) -> rug::Rational {
    rug::Rational::from((to_rug_integer(x.numer()), to_rug_integer(x.denom())))
}

fn up(x: impl Into<Integer>) -> Float {
    Float::with_val_round(PRECISION, x.into(), Round::Up).0
}

/// `1/(a!b!) · 2^{a+b} · m^{a+b−1} · exp(π√(2/3)(√a+√b)) · b^{a+1/2} · a^{b+1/2}`,
/// rounded up.
pub fn chi_upper_bound(a: u32, b: u32, m: u32) -> Float {
    assert!(a >= 1 && b >= 1 && m >= 1, "chi_upper_bound needs a, b, m >= 1");
    // exact integer part: 2^{a+b} m^{a+b−1} b^a a^b
    let mut exact = Integer::from(1) << (a + b);
    exact *= Integer::from(m).pow(a + b - 1);
    exact *= Integer::from(b).pow(a);
    exact *= Integer::from(a).pow(b);
    let mut x = up(exact);

    let mut root = up(a);
    root.sqrt_round(Round::Up);
    let mut root_b = up(b);
    root_b.sqrt_round(Round::Up);
    root.add_assign_round(&root_b, Round::Up);
    let mut c = Float::with_val_round(PRECISION, 2u32, Round::Up).0;
    c.div_assign_round(3u32, Round::Up);
    c.sqrt_round(Round::Up);
    c.mul_assign_round(&Float::with_val_round(PRECISION, Constant::Pi, Round::Up).0, Round::Up);
    c.mul_assign_round(&root, Round::Up);
    c.exp_round(Round::Up);
    x.mul_assign_round(&c, Round::Up);

    // √b·√a = √(ab)
    let mut s = up(a as u64 * b as u64);
    s.sqrt_round(Round::Up);
    x.mul_assign_round(&s, Round::Up);

    let den = to_rug_integer(&(factorial(a as u64) * factorial(b as u64)));
    x.div_assign_round(&Float::with_val_round(PRECISION, den, Round::Down).0, Round::Up);
    x
}

/// `c·m^{â+b̂−1}` bounding `χ(M^s(N_m))` from the degree product: for a
/// trivial pair this is [`trivial_partition_upper_bound`], otherwise
/// `c = b^â · a^b̂ · ∏_l l^{a_l+b_l}` where `a`, `b` are the pair's totals.
pub fn chi_partition_upper_bound(pair: &PartitionPair) -> RationalPolynomial {
    let (a, b) = (pair.source.total(), pair.sink.total());
    if pair.is_trivial() {
        return trivial_partition_upper_bound(a as u32, b as u32);
    }
    let (a_hat, b_hat) = (pair.source.hat(), pair.sink.hat());
    let mut c = BigInt::from(b).pow(a_hat as u32) * BigInt::from(a).pow(b_hat as u32);
    for (l, mult) in pair.source.parts().chain(pair.sink.parts()) {
        c *= BigInt::from(l).pow(mult);
    }
    RationalPolynomial::monomial((a_hat + b_hat - 1) as u32, BigRational::from_integer(c))
}

/// The sharper bound for the trivial pair: `a^{b−1}b^{a−1}·m^{a+b−1}`.
pub fn trivial_partition_upper_bound(a: u32, b: u32) -> RationalPolynomial {
    RationalPolynomial::monomial(
        a + b - 1,
        BigRational::from_integer(cayley_count(a as u64, b as u64)),
    )
}

/// `(m ∓ √(m²−4))/2`.
pub fn root_interval(m: u32) -> (f64, f64) {
    let mut disc = Float::with_val(PRECISION, m as u64 * m as u64 - 4);
    disc.sqrt_mut();
    let lo = (Float::with_val(PRECISION, m) - &disc) / 2u32;
    let hi = (Float::with_val(PRECISION, m) + &disc) / 2u32;
    (lo.to_f64(), hi.to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Asymptotics {
    /// Conjectured limit of `ln χ / a`.
    pub f: f64,
    pub g: f64,
    /// `g/f`, infinite where `f` vanishes at the interval ends.
    pub h: f64,
    /// Only defined for integer `k`.
    pub i_triv: Option<f64>,
}

fn ln(x: impl Into<Float>) -> Float {
    let mut x: Float = x.into();
    x.ln_mut();
    x
}

fn fl(x: f64) -> Float {
    Float::with_val(PRECISION, x)
}

/// `f_m(k)`, `g_m(k)`, `h_m(k)` and, for integer `k`, `i_m(k)`.
pub fn asymptotic_values(m: u32, k: f64) -> Result<Asymptotics> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("need m >= 3, got {m}")));
    }
    let (m1, m2) = root_interval(m);
    let slack = 1e-12;
    if !(k.is_finite() && k >= m1 - slack && k <= m2 + slack) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} lies outside [{m1}, {m2}]"
        )));
    }
    let mf = fl(m as f64);
    let kf = fl(k);

    let sq = fl((m as f64 - 1.0).powi(2));
    let prod = fl(m as f64 * m as f64 - 2.0 * m as f64);
    let big_k = sq.clone() * ln(sq) - prod.clone() * ln(prod);
    let mut radicand = kf.clone() * (mf.clone() - &kf) - 1u32;
    if radicand < 0 {
        radicand = fl(0.0);
    }
    radicand.sqrt_mut();
    let mut norm = fl(m as f64 - 2.0);
    norm.sqrt_mut();
    let f = (big_k * radicand / norm).to_f64();

    let ln2 = Float::with_val(PRECISION, Constant::Log2);
    let ln_m = ln(mf.clone());
    let one_plus_k = kf.clone() + 1u32;
    let mut g = one_plus_k.clone() * (ln_m.clone() + &ln2 + 1u32);
    g -= (kf.clone() - 1u32) * ln(kf.clone());
    let g = g.to_f64();

    let h = if f > 0.0 { g / f } else { f64::INFINITY };

    let i_triv = (k.fract() == 0.0 && k >= 1.0).then(|| {
        let lf = factorial(k as u64 - 1);
        let lf = ln(Float::with_val(PRECISION, to_rug_integer(&lf)));
        (ln_m.clone() * &one_plus_k + 1u32 - lf).to_f64()
    });

    Ok(Asymptotics { f, g, h, i_triv })
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub chi_value: BigRational,
    pub upper_bound: Float,
    pub k: BigRational,
    pub asymptotics: Asymptotics,
    pub m1: f64,
    pub m2: f64,
    pub schur_root: bool,
    pub dimension: i64,
}

impl BoundReport {
    /// Exact comparison of `χ` with the rounded-up bound.
    pub fn within_bound(&self) -> bool {
        self.upper_bound >= to_rug_rational(&self.chi_value)
    }

    pub fn ratio(&self) -> f64 {
        let chi = Float::with_val(PRECISION, to_rug_rational(&self.chi_value));
        (chi / &self.upper_bound).to_f64()
    }

    pub const CSV_HEADER: &'static str =
        "a,b,m,chi,upper_bound,ratio,k,f,g,h,i_triv,schur_root,dimension";

    pub fn csv_row(&self) -> String {
        let s = &self.asymptotics;
        let bound = self.upper_bound.to_string_radix_round(10, Some(12), Round::Up);
        format!(
            "{},{},{},{},{},{:.6e},{},{:.6},{:.6},{},{},{},{}",
            self.a,
            self.b,
            self.m,
            rational_to_plain(&self.chi_value),
            bound,
            self.ratio(),
            rational_to_string(&self.k),
            s.f,
            s.g,
            fmt_float(s.h),
            s.i_triv.map(|x| format!("{x:.6}")).unwrap_or_default(),
            self.schur_root,
            self.dimension,
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let s = &self.asymptotics;
        serde_json::json!({
            "a": self.a,
            "b": self.b,
            "m": self.m,
            "chi": rational_to_plain(&self.chi_value),
            "upper_bound": self.upper_bound.to_string_radix_round(10, Some(12), Round::Up),
            "ratio": self.ratio(),
            "k": rational_to_string(&self.k),
            "f": s.f,
            "g": s.g,
            "h": if s.h.is_finite() { serde_json::json!(s.h) } else { serde_json::json!("inf") },
            "i_triv": s.i_triv,
            "m1": self.m1,
            "m2": self.m2,
            "schur_root": self.schur_root,
            "dimension": self.dimension,
        })
    }
}

fn rational_to_plain(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        rational_to_string(x)
    }
}

fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".into()
    }
}

/// One row per coprime `(a, b)` with `a ≤ a_max` and `b/a` strictly inside
/// `(m1, m2)`, ordered by `(a, b)`.
///
/// `b` reaches about `2.6·a` at `m = 3`, so the censuses grow quickly with
/// `a_max`; the engine's budget applies.
pub fn bound_table(engine: &Engine, a_max: u32, m: u32) -> Result<Vec<BoundReport>> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("need m >= 3, got {m}")));
    }
    let (m1, m2) = root_interval(m);
    let mut dims = Vec::new();
    for a in 1..=a_max {
        for b in 1..=(m * a) {
            if is_theta_coprime(a as u64, b as u64) && is_imaginary_schur_root(a as u64, b as u64, m as u64) {
                dims.push((a, b));
            }
        }
    }
    dims.par_iter()
        .map(|&(a, b)| {
            let chi = engine.chi_kronecker(a, b)?.chi;
            let k = BigRational::new(BigInt::from(b), BigInt::from(a));
            Ok(BoundReport {
                a,
                b,
                m,
                chi_value: chi.eval_int(m as i64),
                upper_bound: chi_upper_bound(a, b, m),
                asymptotics: asymptotic_values(m, k.to_f64().expect("small ratio"))?,
                k,
                m1,
                m2,
                schur_root: true,
                dimension: moduli_dimension(a as u64, b as u64, m as u64),
            })
        })
        .collect()
}

/// `true` when the exact coefficient of `chi_pair` is at most the bound's.
pub fn partition_bound_holds(pair: &PartitionPair, chi_pair: &RationalPolynomial) -> bool {
    let bound = chi_partition_upper_bound(pair);
    let (e, c) = bound.as_monomial().expect("monomial bound");
    chi_pair.terms().all(|(f, x)| f == e && x <= c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{integer, rational};

    #[test]
    fn upper_bound_examples() {
        let b = chi_upper_bound(2, 3, 3);
        assert!(b > 1.0e8 && b < 1.5e8, "{b}");
        assert!(b >= 13);
        for m in 3..=10u32 {
            assert!(chi_upper_bound(1, 1, m) >= m);
        }
        assert!(chi_upper_bound(2, 3, 4) > chi_upper_bound(2, 3, 3));
    }

    #[test]
    fn upper_bound_matches_a_plain_evaluation() {
        let (a, b, m) = (3.0f64, 4.0f64, 5.0f64);
        let plain = 2f64.powf(a + b) * m.powf(a + b - 1.0)
            * (std::f64::consts::PI * (2.0f64 / 3.0).sqrt() * (a.sqrt() + b.sqrt())).exp()
            * b.powf(a + 0.5)
            * a.powf(b + 0.5)
            / (6.0 * 24.0);
        let exact = chi_upper_bound(3, 4, 5).to_f64();
        assert!(exact >= plain * (1.0 - 1e-12) && exact <= plain * (1.0 + 1e-9));
    }

    #[test]
    fn partition_bounds() {
        let pair = |s: &str, t: &str| PartitionPair::new(s.parse().unwrap(), t.parse().unwrap());
        assert_eq!(
            chi_partition_upper_bound(&pair("1*2", "1*3")),
            RationalPolynomial::monomial(4, integer(12))
        );
        assert_eq!(
            chi_partition_upper_bound(&pair("2*1", "3*1")),
            RationalPolynomial::monomial(1, integer(36))
        );
        assert_eq!(chi_partition_upper_bound(&pair("1*1", "1*1")), RationalPolynomial::m());
        assert_eq!(trivial_partition_upper_bound(2, 3), RationalPolynomial::monomial(4, integer(12)));
    }

    #[test]
    fn asymptotic_examples() {
        let v = asymptotic_values(3, 1.0).unwrap();
        assert!((v.g - 2.0 * (3f64.ln() + 2f64.ln() + 1.0)).abs() < 1e-12);
        assert!((v.g - 5.5835).abs() < 1e-4);
        assert!((v.i_triv.unwrap() - (2.0 * 3f64.ln() + 1.0)).abs() < 1e-12);
        assert!((v.f - (4.0 * 4f64.ln() - 3.0 * 3f64.ln())).abs() < 1e-12);
        assert!((v.f - 2.249).abs() < 1e-3);
        assert!(asymptotic_values(3, 1.5).unwrap().i_triv.is_none());
        assert!(asymptotic_values(3, 3.0).is_err());
        assert!(asymptotic_values(2, 1.0).is_err());
        let (m1, m2) = root_interval(3);
        assert!(m1 < m2);
        assert!(asymptotic_values(3, m1).unwrap().h > 1e6);
        assert!(asymptotic_values(3, m2).unwrap().h > 1e6);
    }

    #[test]
    fn table_for_small_dimensions() {
        let rows = bound_table(&Engine::new(), 2, 3).unwrap();
        let find = |a, b| rows.iter().find(|r| r.a == a && r.b == b).unwrap();
        assert_eq!(find(1, 1).chi_value, integer(3));
        assert_eq!(find(1, 2).chi_value, integer(3));
        assert_eq!(find(2, 3).chi_value, integer(13));
        for r in &rows {
            assert!(r.within_bound());
            let k = r.k.to_f64().unwrap();
            assert!(r.m1 < k && k < r.m2);
            assert_eq!(r.csv_row().split(',').count(), 13);
        }
        assert_eq!(find(2, 3).k, rational(3, 2));
    }
}
