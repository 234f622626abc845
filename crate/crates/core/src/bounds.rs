//! Closed-form bound calculators: Bézout, degree and sequence bounds, the
//! VC-dimension estimates with exact certification, and a brute-force
//! shattering oracle.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{MultiPoly, PolyError};
use crate::ring::Rational;
use crate::sequences::{degree_bounds, required_length, required_set_size, ClassSpec, Kind};

/// Default cap on `C(pool, s) * 2^s * |class|` summed over `s`.
pub const SHATTER_BUDGET: u64 = 10_000_000;

/// Precision schedule (bits) for certified logarithm comparisons.
const LOG_PRECISIONS: [u32; 6] = [32, 64, 128, 256, 512, 1024];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("combinatorial budget exceeded: {needed} > {budget}")]
    Budget { needed: u64, budget: u64 },
    #[error("comparison of s = {0} could not be certified")]
    Undecided(u64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A named bound with the formula it instantiates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub value: String,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: serde_json::Value,
    pub bounds: BTreeMap<String, Bound>,
    pub notes: Vec<String>,
}

impl BoundsReport {
    fn new(inputs: serde_json::Value) -> Self {
        Self {
            inputs,
            bounds: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, value: impl ToString, anchor: &str) {
        self.bounds.insert(
            name.to_string(),
            Bound {
                value: value.to_string(),
                anchor: anchor.to_string(),
            },
        );
    }
}

pub fn bezout(deg_v: &BigUint, deg_w: &BigUint) -> BigUint {
    deg_v * deg_w
}

pub fn bezout_report(deg_v: &BigUint, deg_w: &BigUint) -> BoundsReport {
    let mut r = BoundsReport::new(serde_json::json!({
        "deg_v": deg_v.to_string(),
        "deg_w": deg_w.to_string(),
    }));
    r.add("bezout", bezout(deg_v, deg_w), "deg(V ∩ W) <= deg V * deg W");
    r
}

/// Degree and sequence bounds of a class.
pub fn degree_report(spec: &ClassSpec, equidimensional: bool) -> BoundsReport {
    let mut r = BoundsReport::new(serde_json::to_value(spec).expect("serializable"));
    let d = degree_bounds(spec, equidimensional);
    r.add("deg_d", &d.deg_d_bound, "deg D <= (1 + K Δ1)^L");
    let o_anchor = if equidimensional {
        "deg O <= Δ2^L deg D"
    } else {
        "deg O <= (L + 1) Δ2^L deg D"
    };
    r.add("deg_o", &d.deg_o_bound, o_anchor);
    for (kind, name, anchor) in [
        (Kind::CorrectTest, "correct_test", "m = 2L + 2"),
        (Kind::Identification, "identification", "m = 4L + 2"),
        (Kind::CircuitClass, "circuit_class", "m = 4(L + t + 1)^2 + 2"),
    ] {
        r.add(&format!("{name}.m"), required_length(spec, kind), anchor);
        let set_anchor = match kind {
            Kind::CircuitClass => "#M = 2^(4(L + 1))",
            _ => "#M^L >= Δ^(2L) deg D",
        };
        r.add(&format!("{name}.set_size"), required_set_size(spec, kind), set_anchor);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VcVariant {
    Complex,
    Real,
}

/// Closed interval `[lo, hi]` of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    fn exact(q: Rational) -> Self {
        Self { lo: q.clone(), hi: q }
    }

    /// Product of nonnegative intervals.
    fn mul(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo * &o.lo,
            hi: &self.hi * &o.hi,
        }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }
}

/// Certified bounds on `log2 x` for an integer `x >= 1`, each within
/// `2^(1 - bits)` of the true value. Repeated squaring of the mantissa in
/// fixed point, rounded down in one stream and up in the other.
fn log2_interval(x: &BigUint, bits: u32) -> Interval {
    assert!(!x.is_zero());
    let e = x.bits() - 1;
    let p = e + u64::from(bits) + 16;
    let one = BigUint::one() << p;
    let two = BigUint::one() << (p + 1);
    let start = x << (p - e);
    let mut lo = start.clone();
    let mut hi = start;
    let mut lo_frac = BigUint::zero();
    let mut hi_frac = BigUint::zero();
    for _ in 0..bits {
        lo = (&lo * &lo) >> p;
        hi = (&hi * &hi + &one - 1u32) >> p;
        lo_frac <<= 1;
        hi_frac <<= 1;
        if lo >= two {
            lo_frac += 1u32;
            lo >>= 1;
        }
        if hi >= two {
            hi_frac += 1u32;
            hi = (hi + 1u32) >> 1;
        }
    }
    let scale = BigInt::one() << bits;
    let base = Rational::from_integer(BigInt::from(e));
    let lo = base.clone() + Rational::new(BigInt::from(lo_frac), scale.clone());
    // final mantissa is below 4, so its log adds at most two more ulps
    let hi = base + Rational::new(BigInt::from(hi_frac) + 2, scale);
    Interval { lo, hi }
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcUpper {
    pub l: u64,
    pub delta2: u64,
    pub variant: VcVariant,
    /// The right-hand side when it is rational, e.g. for `Δ2` a power of two.
    #[serde(with = "opt_rational")]
    pub rhs_exact: Option<Rational>,
    /// Certified enclosure of the right-hand side (rational strings).
    pub rhs_lower: String,
    pub rhs_upper: String,
    pub rhs_approx: f64,
    /// Largest `s >= 2` with `s / log2 s <= rhs`, or `1` when there is none.
    pub max_dim: u64,
    pub anchor: String,
    pub notes: Vec<String>,
}

mod opt_rational {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.collect_str(q),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| crate::ring::parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

fn rhs_interval(l: u64, delta2: u64, variant: VcVariant, bits: u32) -> Interval {
    let b = log2_interval(&BigUint::from(delta2), bits);
    match variant {
        VcVariant::Complex => Interval::exact(int(l)).mul(&Interval::exact(int(1)).add(&b)),
        VcVariant::Real => Interval::exact(int(l + 1)).mul(&b),
    }
}

/// Certified answer to `s / log2 s <= rhs`, i.e. `s <= rhs * log2 s`.
fn accepts(s: u64, l: u64, delta2: u64, variant: VcVariant) -> Result<bool, BoundsError> {
    assert!(s >= 2);
    let target = int(s);
    for bits in LOG_PRECISIONS {
        let a = log2_interval(&BigUint::from(s), bits);
        let prod = rhs_interval(l, delta2, variant, bits).mul(&a);
        if target <= prod.lo {
            return Ok(true);
        }
        if target > prod.hi {
            return Ok(false);
        }
    }
    Err(BoundsError::Undecided(s))
}

/// Upper estimate `dim / log2 dim <= L (1 + log2 Δ2)` (complex) or its
/// leading-order real analogue `(L + 1) log2 Δ2`, solved for the largest
/// admissible dimension.
pub fn vc_upper(l: u64, delta2: u64, variant: VcVariant) -> Result<VcUpper, BoundsError> {
    if l == 0 || delta2 == 0 {
        return Err(BoundsError::InvalidArgument("L and Δ2 must be positive".into()));
    }
    let mut notes = vec!["dimensions are taken with s >= 2 since log2 1 = 0".to_string()];
    if variant == VcVariant::Real {
        notes.push("leading-order: the O(1 / log dim) term is dropped".into());
    }
    let ok = |s: u64| accepts(s, l, delta2, variant);
    // s / log2 s increases from s = 3 on; s = 2 lies above s = 3.
    let max_dim = if !ok(3)? {
        notes.push("no s >= 2 satisfies the estimate; reported 1".into());
        1
    } else {
        let mut lo = 3u64;
        let mut hi = 6u64;
        while ok(hi)? {
            lo = hi;
            hi = hi.checked_mul(2).ok_or(BoundsError::Undecided(hi))?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let rhs = rhs_interval(l, delta2, variant, 64);
    let rhs_exact = delta2.is_power_of_two().then(|| rhs.lo.clone());
    let anchor = match variant {
        VcVariant::Complex => "dim / log2 dim <= L (1 + log2 Δ2)",
        VcVariant::Real => "dim / log2 dim <= (L + 1) log2 Δ2 + O(1 / log2 dim)",
    };
    Ok(VcUpper {
        l,
        delta2,
        variant,
        rhs_exact,
        rhs_lower: rhs.lo.to_string(),
        rhs_upper: rhs.hi.to_string(),
        rhs_approx: rhs.lo.to_f64().unwrap_or(f64::NAN),
        max_dim,
        anchor: anchor.into(),
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WltSandwich {
    #[serde(with = "crate::ring::rational_text")]
    pub lower: Rational,
    /// Exact when `(L + t + 1)^ε` is rational, otherwise the least integer
    /// power bracket above it.
    #[serde(with = "crate::ring::rational_text")]
    pub upper: Rational,
    pub upper_exact: bool,
    pub anchor: String,
}

/// `L^2/4 - 1 < dim_VC(W_{L,t}) <= 8 (L + t + 1)^(3 + ε)`.
pub fn wlt_vc_sandwich(l: u64, t: u64, epsilon: &Rational) -> Result<WltSandwich, BoundsError> {
    if l == 0 || t == 0 {
        return Err(BoundsError::InvalidArgument("L and t must be positive".into()));
    }
    if !epsilon.is_positive() {
        return Err(BoundsError::InvalidArgument("ε must be positive".into()));
    }
    let lower = Rational::new(BigInt::from(l * l), BigInt::from(4)) - int(1);
    let base = BigUint::from(l + t + 1);
    let cube = Rational::from_integer(BigInt::from(Pow::pow(&base, 3u32)));
    // base^ε = base^(p/q); bracket by the least c with c^q >= base^p
    let p = epsilon.numer().to_u32().ok_or_else(|| {
        BoundsError::InvalidArgument("ε numerator too large".into())
    })?;
    let q = epsilon.denom().to_u32().ok_or_else(|| {
        BoundsError::InvalidArgument("ε denominator too large".into())
    })?;
    let target: BigUint = Pow::pow(&base, p);
    let mut c = target.nth_root(q);
    if Pow::pow(&c, q) < target {
        c += 1u32;
    }
    let upper_exact = Pow::pow(&c, q) == target;
    let upper = int(8) * cube * Rational::from_integer(BigInt::from(c));
    Ok(WltSandwich {
        lower,
        upper,
        upper_exact,
        anchor: "L^2/4 - 1 < dim_VC <= 8 (L + t + 1)^(3 + ε)".into(),
    })
}

pub fn vc_report(l: u64, delta2: u64, variant: VcVariant) -> Result<BoundsReport, BoundsError> {
    let v = vc_upper(l, delta2, variant)?;
    let mut r = BoundsReport::new(serde_json::json!({"L": l, "delta2": delta2, "variant": variant}));
    r.add("rhs_lower", &v.rhs_lower, &v.anchor);
    r.add("rhs_upper", &v.rhs_upper, &v.anchor);
    if let Some(q) = &v.rhs_exact {
        r.add("rhs", q, &v.anchor);
    }
    r.add("max_dim", v.max_dim, &v.anchor);
    r.notes = v.notes;
    Ok(r)
}

pub fn wlt_report(l: u64, t: u64, epsilon: &Rational) -> Result<BoundsReport, BoundsError> {
    let w = wlt_vc_sandwich(l, t, epsilon)?;
    let mut r = BoundsReport::new(serde_json::json!({"L": l, "t": t, "epsilon": epsilon.to_string()}));
    r.add("lower", &w.lower, &w.anchor);
    r.add("upper", &w.upper, &w.anchor);
    if !w.upper_exact {
        r.notes.push("upper rounded up to an integer-power bracket of (L + t + 1)^ε".into());
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterResult {
    pub dim: usize,
    /// Pool indices of a shattered set of size `dim`.
    pub witness_set: Vec<usize>,
    /// For each subset of the witness (as a bit mask over it), the index of
    /// a class member whose zeros within the witness are exactly that subset.
    pub witnesses: Vec<(u64, usize)>,
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic `s`-subsets of `0..n`.
fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..s).collect();
    if s > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..s).rev().find(|&i| cur[i] != i + n - s) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..s {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Largest `s <= max_s` such that some `s`-subset of the pool is shattered
/// by the zero sets of the class members. Members are evaluated over `vars`.
pub fn vc_shatter_oracle<S: AsRef<str>>(
    class: &[MultiPoly],
    vars: &[S],
    pool: &[Vec<Rational>],
    max_s: usize,
    budget: u64,
) -> Result<ShatterResult, BoundsError> {
    if pool.len() < max_s {
        return Err(BoundsError::InvalidArgument(format!(
            "pool of {} points is smaller than max_s = {max_s}",
            pool.len()
        )));
    }
    if max_s > 63 {
        return Err(BoundsError::InvalidArgument("max_s must be below 64".into()));
    }
    let empty = ShatterResult {
        dim: 0,
        witness_set: vec![],
        witnesses: vec![],
    };
    if class.is_empty() {
        return Ok(empty);
    }
    let mut needed: u64 = 0;
    for s in 1..=max_s as u64 {
        let c = binomial(pool.len() as u64, s);
        needed = needed.saturating_add(c.saturating_mul(1 << s).saturating_mul(class.len() as u64));
    }
    if needed > budget {
        return Err(BoundsError::Budget { needed, budget });
    }
    // zeros[f][a]: member f vanishes at pool point a
    let aligned = class
        .iter()
        .map(|f| f.with_vars(vars))
        .collect::<Result<Vec<_>, _>>()?;
    let zeros: Vec<Vec<bool>> = crate::par::try_map_range(aligned.len(), |f| {
        pool.iter()
            .map(|pt| aligned[f].eval_rational(pt).map(|v| v.is_zero()))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let pattern = |f: usize, set: &[usize]| -> u64 {
        set.iter()
            .enumerate()
            .filter(|&(_, &a)| zeros[f][a])
            .fold(0u64, |m, (i, _)| m | (1 << i))
    };
    let mut best = ShatterResult {
        witnesses: vec![(0, 0)],
        ..empty
    };
    for s in 1..=max_s {
        let sets = combinations(pool.len(), s);
        let shattered = |set: &[usize]| {
            let mut seen = vec![false; 1 << s];
            for f in 0..zeros.len() {
                seen[pattern(f, set) as usize] = true;
            }
            seen.iter().all(|&x| x)
        };
        let Some(k) = crate::par::find_first(sets.len(), |k| shattered(&sets[k])) else {
            break;
        };
        let set = sets[k].clone();
        let witnesses = (0..1u64 << s)
            .map(|mask| {
                let f = (0..zeros.len()).find(|&f| pattern(f, &set) == mask).expect("shattered");
                (mask, f)
            })
            .collect();
        best = ShatterResult {
            dim: s,
            witness_set: set,
            witnesses,
        };
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly_in;
    use crate::ring::{rat, rat_frac};
    use proptest::prelude::*;

    fn linear_class() -> Vec<MultiPoly> {
        let mut out = Vec::new();
        for a in -1..=1 {
            for b in -1..=1 {
                out.push(parse_poly_in(&format!("{a}*Y + {b}"), &["Y"]).unwrap());
            }
        }
        out
    }

    fn pool(xs: &[i64]) -> Vec<Vec<Rational>> {
        xs.iter().map(|&x| vec![rat(x)]).collect()
    }

    #[test]
    fn bezout_examples() {
        let b = |x: u64, y: u64| bezout(&x.into(), &y.into());
        assert_eq!(b(3, 5), 15u32.into());
        assert_eq!(b(1, 7), 7u32.into());
        assert_eq!(b(0, 7), BigUint::zero());
        let r = bezout_report(&3u32.into(), &5u32.into());
        assert_eq!(r.bounds["bezout"].value, "15");
    }

    #[test]
    fn log2_intervals_are_sound() {
        for x in [1u64, 2, 3, 5, 10, 1000, 1 << 40, 12345678901] {
            let i = log2_interval(&BigUint::from(x), 64);
            let f = (x as f64).log2();
            assert!(i.lo.to_f64().unwrap() <= f + 1e-12 && f - 1e-12 <= i.hi.to_f64().unwrap());
            assert!((&i.hi - &i.lo) <= Rational::new(BigInt::one(), BigInt::one() << 60));
        }
        assert_eq!(log2_interval(&BigUint::from(8u32), 32).lo, rat(3));
    }

    #[test]
    fn vc_upper_examples() {
        let v = vc_upper(2, 1, VcVariant::Complex).unwrap();
        assert_eq!((v.rhs_exact.clone(), v.max_dim), (Some(rat(2)), 4));
        let v = vc_upper(4, 2, VcVariant::Complex).unwrap();
        assert_eq!(v.rhs_exact, Some(rat(8)));
        assert!((32..=47).contains(&v.max_dim));
        assert_eq!(v.max_dim, 43);
        let v = vc_upper(1, 1, VcVariant::Complex).unwrap();
        assert_eq!(v.max_dim, 1);
        assert!(v.notes.iter().any(|n| n.contains("reported 1")));
        let r = vc_upper(3, 1, VcVariant::Real).unwrap();
        assert_eq!(r.max_dim, 1);
        assert!(r.notes.iter().any(|n| n.starts_with("leading-order")));
    }

    #[test]
    fn vc_max_dim_is_tight() {
        for l in 1..=6 {
            for d2 in 1..=9 {
                for variant in [VcVariant::Complex, VcVariant::Real] {
                    let v = vc_upper(l, d2, variant).unwrap();
                    if v.max_dim >= 2 {
                        assert!(accepts(v.max_dim, l, d2, variant).unwrap());
                        assert!(!accepts(v.max_dim + 1, l, d2, variant).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn vc_upper_is_monotone() {
        for l in 1..=8 {
            for d2 in 1..=8 {
                let a = vc_upper(l, d2, VcVariant::Complex).unwrap().max_dim;
                assert!(vc_upper(l + 1, d2, VcVariant::Complex).unwrap().max_dim >= a);
                assert!(vc_upper(l, d2 + 1, VcVariant::Complex).unwrap().max_dim >= a);
            }
        }
    }

    #[test]
    fn wlt_examples() {
        let w = wlt_vc_sandwich(4, 1, &rat(1)).unwrap();
        assert_eq!((w.lower, w.upper.clone()), (rat(3), rat(10368)));
        assert!(w.upper_exact);
        let w = wlt_vc_sandwich(2, 1, &rat(1)).unwrap();
        assert_eq!((w.lower, w.upper), (rat(0), rat(2048)));
        // 4^(1/2) = 2 exactly; 5^(1/2) is bracketed by 3
        assert_eq!(wlt_vc_sandwich(2, 1, &rat_frac(1, 2)).unwrap().upper, rat(8 * 64 * 2));
        let w = wlt_vc_sandwich(3, 1, &rat_frac(1, 2)).unwrap();
        assert_eq!(w.upper, rat(8 * 125 * 3));
        assert!(!w.upper_exact);
        assert!(wlt_vc_sandwich(2, 1, &rat(0)).is_err());
        for l in 2..=16 {
            for t in 1..=4 {
                let w = wlt_vc_sandwich(l, t, &rat(1)).unwrap();
                assert!(w.lower < w.upper);
            }
        }
    }

    #[test]
    fn shatter_examples() {
        let r = vc_shatter_oracle(&linear_class(), &["Y"], &pool(&[-1, 0, 1, 2]), 3, SHATTER_BUDGET)
            .unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.witnesses.len(), 4);
        assert!(r.dim as u64 <= vc_upper(2, 1, VcVariant::Complex).unwrap().max_dim);
        let none: Vec<MultiPoly> = vec![];
        assert_eq!(vc_shatter_oracle(&none, &["Y"], &pool(&[1]), 1, SHATTER_BUDGET).unwrap().dim, 0);
        let consts = vec![
            parse_poly_in("0", &["Y"]).unwrap(),
            parse_poly_in("1", &["Y"]).unwrap(),
        ];
        assert_eq!(vc_shatter_oracle(&consts, &["Y"], &pool(&[5]), 1, SHATTER_BUDGET).unwrap().dim, 1);
        assert!(matches!(
            vc_shatter_oracle(&linear_class(), &["Y"], &pool(&[-1, 0, 1, 2]), 3, 10),
            Err(BoundsError::Budget { .. })
        ));
    }

    #[test]
    fn degree_report_has_anchors() {
        let r = degree_report(&ClassSpec::new(2, 1, 2), false);
        assert_eq!(r.bounds["circuit_class.m"].value, "66");
        assert_eq!(r.bounds["circuit_class.set_size"].value, "4096");
        assert!(r.bounds.values().all(|b| !b.anchor.is_empty()));
    }

    proptest! {
        #[test]
        fn combinations_count(n in 0usize..9, s in 0usize..5) {
            let c = combinations(n, s);
            if s <= n {
                prop_assert_eq!(c.len() as u64, binomial(n as u64, s as u64));
            }
        }
    }
}
