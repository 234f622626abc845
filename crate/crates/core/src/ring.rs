//! Exact arithmetic backends behind a single field abstraction.
//!
//! Two families of fields are provided: the rationals (arbitrary precision,
//! always stored reduced) and prime fields. Prime fields come in an
//! arbitrary-precision flavour ([`PrimeField`]) and a word-sized flavour
//! ([`Fp64`]) used by the heavy elimination kernels.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Exact rational number. `num_rational` keeps it reduced with a positive
/// denominator, so structural equality is value equality.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("no element of order {d} in F_{p}: {d} does not divide p - 1")]
    NoSuchRoot { p: BigUint, d: u64 },
    #[error("cannot parse {0:?} as a field element")]
    Parse(String),
}

/// A field whose elements are plain values; the field object carries the
/// context (for prime fields, the modulus).
pub trait Field: Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithError>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Short label used in reports, e.g. `Q` or `F_101`.
    fn label(&self) -> String;
    fn format(&self, a: &Self::Elem) -> String;

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(n))
    }

    fn from_rational(&self, q: &Rational) -> Result<Self::Elem, ArithError> {
        let num = self.from_bigint(q.numer());
        let den = self.from_bigint(q.denom());
        self.div(&num, &den)
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ArithError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, base: &Self::Elem, exp: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut sq = base.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpValue<E> {
    Elem(E),
    Bool(bool),
}

/// Applies one field operation; unary operations ignore `b`.
pub fn apply_op<F: Field>(
    field: &F,
    op: FieldOp,
    a: &F::Elem,
    b: Option<&F::Elem>,
) -> Result<OpValue<F::Elem>, ArithError> {
    let rhs = || b.cloned().unwrap_or_else(|| field.zero());
    Ok(match op {
        FieldOp::Add => OpValue::Elem(field.add(a, &rhs())),
        FieldOp::Sub => OpValue::Elem(field.sub(a, &rhs())),
        FieldOp::Mul => OpValue::Elem(field.mul(a, &rhs())),
        FieldOp::Div => OpValue::Elem(field.div(a, &rhs())?),
        FieldOp::Neg => OpValue::Elem(field.neg(a)),
        FieldOp::Inv => OpValue::Elem(field.inv(a)?),
        FieldOp::Eq => OpValue::Bool(*a == rhs()),
    })
}

/// The field of rational numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn from_bigint(&self, n: &BigInt) -> Rational {
        Rational::from_integer(n.clone())
    }
    fn from_rational(&self, q: &Rational) -> Result<Rational, ArithError> {
        Ok(q.clone())
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn inv(&self, a: &Rational) -> Result<Rational, ArithError> {
        if a.is_zero() {
            Err(ArithError::DivisionByZero)
        } else {
            Ok(a.recip())
        }
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn label(&self) -> String {
        "Q".to_string()
    }
    fn format(&self, a: &Rational) -> String {
        a.to_string()
    }
}

/// Prime field with an arbitrary-precision modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeField {
    modulus: BigUint,
}

impl PrimeField {
    pub fn new(modulus: BigUint) -> Result<Self, ArithError> {
        if !is_prime(&modulus) {
            return Err(ArithError::NotPrime(modulus));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn from_u64(&self, n: u64) -> BigUint {
        BigUint::from(n) % &self.modulus
    }

    pub fn pow_big(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        base.modpow(exp, &self.modulus)
    }
}

impl Field for PrimeField {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one() % &self.modulus
    }
    fn from_bigint(&self, n: &BigInt) -> BigUint {
        let p = BigInt::from(self.modulus.clone());
        n.mod_floor(&p).to_biguint().expect("mod_floor is nonnegative")
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.modulus {
            s - &self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.modulus - b + a
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }
    fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.modulus - a
        }
    }
    fn inv(&self, a: &BigUint) -> Result<BigUint, ArithError> {
        if a.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        let e = &self.modulus - BigUint::from(2u32);
        Ok(a.modpow(&e, &self.modulus))
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn pow(&self, base: &BigUint, exp: u64) -> BigUint {
        base.modpow(&BigUint::from(exp), &self.modulus)
    }
    fn label(&self) -> String {
        format!("F_{}", self.modulus)
    }
    fn format(&self, a: &BigUint) -> String {
        a.to_string()
    }
}

/// Prime field with a modulus below 2^64; products go through `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp64 {
    p: u64,
}

impl Fp64 {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if !is_prime_u64(p) {
            return Err(ArithError::NotPrime(BigUint::from(p)));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, n: u64) -> u64 {
        n % self.p
    }

    /// `acc - a * b` in one step, the inner update of row elimination.
    #[inline]
    pub fn sub_mul(&self, acc: u64, a: u64, b: u64) -> u64 {
        let prod = ((a as u128 * b as u128) % self.p as u128) as u64;
        if acc >= prod {
            acc - prod
        } else {
            self.p - prod + acc
        }
    }
}

impl Field for Fp64 {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.p))
            .to_u64()
            .expect("residue fits in u64")
    }
    fn from_i64(&self, n: i64) -> u64 {
        (n as i128).rem_euclid(self.p as i128) as u64
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = *a as u128 + *b as u128;
        (s % self.p as u128) as u64
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - b + a
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Result<u64, ArithError> {
        if *a == 0 {
            return Err(ArithError::DivisionByZero);
        }
        Ok(self.pow(a, self.p - 2))
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn label(&self) -> String {
        format!("F_{}", self.p)
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; the first twelve primes as bases cover all of `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &SMALL_PRIMES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const MR_ROUNDS: usize = 40;
const MR_SEED: u64 = 0x5eed_0f_b16_1e7;

/// Primality test: deterministic below 2^64, 40 seeded Miller-Rabin rounds above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &q in &SMALL_PRIMES {
        if (n % q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let mut rng = ChaCha8Rng::seed_from_u64(MR_SEED);
    'witness: for _ in 0..MR_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Cap on `d` up to which [`find_primitive_root`] canonicalizes its answer to
/// the least element of order `d`.
const CANONICAL_ROOT_LIMIT: u64 = 1 << 20;

/// Finds an element of multiplicative order exactly `d` in F_p.
///
/// Candidates `g = 2, 3, ...` are lifted to `h = g^((p-1)/d)` until `h` has
/// order `d`. When `d` is small the least residue of order `d` in the cyclic
/// group generated by `h` is returned, so answers do not depend on the scan.
pub fn find_primitive_root(p: &BigUint, d: u64) -> Result<BigUint, ArithError> {
    let field = PrimeField::new(p.clone())?;
    if d == 0 {
        return Err(ArithError::NoSuchRoot { p: p.clone(), d });
    }
    let p_minus_one = p - BigUint::one();
    if !(&p_minus_one % d).is_zero() {
        return Err(ArithError::NoSuchRoot { p: p.clone(), d });
    }
    if d == 1 {
        return Ok(field.one());
    }
    let cofactor = &p_minus_one / d;
    let factors = prime_factors(d);
    let has_order_d = |h: &BigUint| {
        factors
            .iter()
            .all(|&q| !field.pow(h, d / q).is_one())
    };
    let mut g = BigUint::from(2u32);
    let h = loop {
        let h = field.pow_big(&g, &cofactor);
        if has_order_d(&h) {
            break h;
        }
        g += 1u32;
    };
    if d > CANONICAL_ROOT_LIMIT {
        return Ok(h);
    }
    let mut best = h.clone();
    let mut cur = h.clone();
    for i in 2..d {
        cur = field.mul(&cur, &h);
        if i.gcd(&d) == 1 && cur < best {
            best = cur.clone();
        }
    }
    Ok(best)
}

/// Least prime `p > above` with `p ≡ 1 (mod d)`.
pub fn least_prime_congruent_one(d: u64, above: u64) -> u64 {
    assert!(d >= 1);
    let mut p = above - above % d + 1;
    if p <= above {
        p += d;
    }
    while !is_prime_u64(p) {
        p += d;
    }
    p
}

/// Parses `num/den` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let t = text.trim();
    let err = || ArithError::Parse(text.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(ArithError::DivisionByZero);
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Returns the integer value if `q` has denominator one.
pub fn as_integer(q: &Rational) -> Option<BigInt> {
    q.is_integer().then(|| q.numer().clone())
}

pub fn is_negative(q: &Rational) -> bool {
    q.numer().sign() == Sign::Minus
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod rational_text {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod rational_vec_text {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|q| q.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Vec<Vec<Rational>>`.
pub mod rational_matrix_text {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|q| q.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        Vec::<Vec<String>>::deserialize(d)?
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| parse_rational(t).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}
