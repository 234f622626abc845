//! Exact sparse multivariate polynomials with rational coefficients.
//!
//! This is the brute-force representation used as an oracle for everything
//! computed through circuits. Polynomials carry their own variable order;
//! binary operations merge orders by name.

mod expand;
mod interp;
mod parse;
mod univariate;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ring::{ArithError, Field, Rational};

pub use expand::{expand, ExpandError, DEFAULT_BUDGET};
pub use interp::{count_terms, interpolate, Grouping, InterpError};
pub use parse::{parse_poly, parse_poly_in};
pub use univariate::{
    derivative_dense, from_dense, product_of_linear_factors, squarefree_part, to_dense, uni_gcd,
};

/// Exponent vector, one entry per variable of the owning polynomial.
pub type Exponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("negative exponent {0}")]
    NegativeExponent(i64),
    #[error("polynomial is not univariate (variables {0:?})")]
    NotUnivariate(Vec<String>),
    #[error("both arguments are zero")]
    BothZero,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("parse error at byte {pos}: {reason}")]
    Parse { pos: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: HashMap<Exponents, Rational>,
}

fn total_degree(e: &[u32]) -> u64 {
    e.iter().map(|&x| x as u64).sum()
}

/// Graded lexicographic order on exponent vectors.
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| a.cmp(b))
}

impl MultiPoly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        Self {
            vars: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            terms: HashMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    /// The polynomial consisting of the single variable `name`.
    pub fn var(name: &str) -> Self {
        Self::monomial(&[name], vec![1], Rational::one())
    }

    pub fn monomial<S: AsRef<str>>(vars: &[S], exps: Exponents, coeff: Rational) -> Self {
        let mut p = Self::zero(vars);
        assert_eq!(exps.len(), p.vars.len());
        if !coeff.is_zero() {
            p.terms.insert(exps, coeff);
        }
        p
    }

    /// Builds a polynomial from terms; repeated exponents are summed and zero
    /// coefficients dropped.
    pub fn from_terms<S, I>(vars: &[S], terms: I) -> Self
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Exponents, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len());
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::hash_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.vars.len()])
    }

    /// Returns the constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(e, _)| e.iter().all(|&x| x == 0))
                .map(|(_, c)| c.clone()),
            _ => None,
        }
    }

    /// Terms in descending graded lexicographic order.
    pub fn sorted_terms(&self) -> Vec<(&Exponents, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| grlex(b.0, a.0));
        v
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|e| total_degree(e)).max()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.var_index(name) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Variables that occur with a positive exponent, in variable order.
    pub fn used_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|e| e[*i] > 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Re-embeds into the variable order `vars`, which must contain every
    /// variable actually used.
    pub fn with_vars<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self, PolyError> {
        let target: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        if target == self.vars {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match target.iter().position(|t| t == v) {
                Some(j) => map.push(Some(j)),
                None => {
                    if self.terms.keys().any(|e| e[i] > 0) {
                        return Err(PolyError::UnknownVariable(v.clone()));
                    }
                    map.push(None);
                }
            }
        }
        let mut out = Self::zero(&target);
        for (e, c) in &self.terms {
            let mut ne = vec![0; target.len()];
            for (i, &x) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    ne[j] = x;
                }
            }
            out.terms.insert(ne, c.clone());
        }
        Ok(out)
    }

    /// Union of two variable orders: `a`'s order followed by new names of `b`.
    fn merged_vars(a: &[String], b: &[String]) -> Vec<String> {
        let mut v = a.to_vec();
        for name in b {
            if !v.contains(name) {
                v.push(name.clone());
            }
        }
        v
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = Self::merged_vars(&self.vars, &other.vars);
        (
            self.with_vars(&vars).expect("superset order"),
            other.with_vars(&vars).expect("superset order"),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn pow(&self, exp: i64) -> Result<Self, PolyError> {
        if exp < 0 {
            return Err(PolyError::NegativeExponent(exp));
        }
        let mut acc = Self::constant(&self.vars, Rational::one());
        let mut sq = self.clone();
        let mut e = exp as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Substitutes `value` for the variable `name`.
    pub fn compose(&self, name: &str, value: &MultiPoly) -> Self {
        let Some(idx) = self.var_index(name) else {
            return self.clone();
        };
        let rest: Vec<String> = self.vars.iter().filter(|v| *v != name).cloned().collect();
        let vars = Self::merged_vars(&rest, &value.vars);
        let value = value.with_vars(&vars).expect("superset order");
        let mut powers: HashMap<u32, MultiPoly> = HashMap::new();
        let mut out = Self::zero(&vars);
        for (e, c) in &self.terms {
            let mut ne = Vec::with_capacity(vars.len());
            for (i, &x) in e.iter().enumerate() {
                if i != idx {
                    ne.push(x);
                }
            }
            ne.resize(vars.len(), 0);
            let base = Self::monomial(&vars, ne, c.clone());
            let k = e[idx];
            let pw = powers
                .entry(k)
                .or_insert_with(|| value.pow(k as i64).expect("nonnegative"));
            out = &out + &(&base * pw);
        }
        out
    }

    /// Substitutes rational values for some variables and drops them from
    /// the variable order.
    pub fn specialize(&self, assignment: &[(&str, Rational)]) -> Self {
        let idx: Vec<Option<Rational>> = self
            .vars
            .iter()
            .map(|v| {
                assignment
                    .iter()
                    .find(|(n, _)| *n == v.as_str())
                    .map(|(_, q)| q.clone())
            })
            .collect();
        let vars: Vec<String> = self
            .vars
            .iter()
            .zip(&idx)
            .filter(|(_, a)| a.is_none())
            .map(|(v, _)| v.clone())
            .collect();
        let mut out = Self::zero(&vars);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut ne = Vec::with_capacity(vars.len());
            for (i, &x) in e.iter().enumerate() {
                match &idx[i] {
                    Some(q) => coeff *= num_traits::pow(q.clone(), x as usize),
                    None => ne.push(x),
                }
            }
            out.add_term(ne, coeff);
        }
        out
    }

    pub fn derivative(&self, name: &str) -> Self {
        let mut out = Self::zero(&self.vars);
        if let Some(i) = self.var_index(name) {
            for (e, c) in &self.terms {
                if e[i] > 0 {
                    let mut ne = e.clone();
                    ne[i] -= 1;
                    out.add_term(ne, c * Rational::from_integer(e[i].into()));
                }
            }
        }
        out
    }

    /// Evaluates over any field; `values` follow the variable order.
    pub fn evaluate<F: Field>(&self, field: &F, values: &[F::Elem]) -> Result<F::Elem, PolyError> {
        if values.len() != self.vars.len() {
            return Err(PolyError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        let mut acc = field.zero();
        for (e, c) in &self.terms {
            let mut t = field.from_rational(c)?;
            for (v, &x) in values.iter().zip(e) {
                if x > 0 {
                    t = field.mul(&t, &field.pow(v, x as u64));
                }
            }
            acc = field.add(&acc, &t);
        }
        Ok(acc)
    }

    pub fn eval_rational(&self, values: &[Rational]) -> Result<Rational, PolyError> {
        self.evaluate(&crate::ring::Rationals, values)
    }

    /// Keeps only the terms whose exponent in `name` is below `bound`
    /// (truncation modulo `name^bound`).
    pub fn truncate_in(&self, name: &str, bound: u32) -> Self {
        let Some(i) = self.var_index(name) else {
            return self.clone();
        };
        Self {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[i] < bound)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient of `name^k` as a polynomial in the remaining variables
    /// (the variable stays in the order with exponent zero).
    pub fn coefficient_of(&self, name: &str, k: u32) -> Self {
        let Some(i) = self.var_index(name) else {
            return if k == 0 {
                self.clone()
            } else {
                Self::zero(&self.vars)
            };
        };
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut ne = e.clone();
                ne[i] = 0;
                out.terms.insert(ne, c.clone());
            }
        }
        out
    }

    fn format_monomial(&self, e: &[u32]) -> String {
        let mut parts = Vec::new();
        for (v, &x) in self.vars.iter().zip(e) {
            match x {
                0 => {}
                1 => parts.push(v.clone()),
                _ => parts.push(format!("{v}^{x}")),
            }
        }
        parts.join("*")
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            return self.terms == other.terms;
        }
        if self.terms.len() != other.terms.len() {
            return false;
        }
        let (a, b) = self.aligned(other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

/// Serialized as canonical text; variables are recovered in order of
/// first appearance.
impl serde::Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_poly(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MultiPoly {
    /// Canonical text: terms in descending graded lexicographic order, for
    /// example `Y^2 - 6*Y + 11`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mono = self.format_monomial(e);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.aligned(rhs);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.aligned(rhs);
        for (e, c) in b.terms {
            a.add_term(e, -c);
        }
        a
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(rhs);
        let mut out = MultiPoly::zero(&a.vars);
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Operations accepted by [`poly_arith`].
#[derive(Debug, Clone)]
pub enum PolyOp<'a> {
    Add(&'a MultiPoly),
    Sub(&'a MultiPoly),
    Mul(&'a MultiPoly),
    Pow(i64),
    /// Substitute the polynomial for the named variable.
    Compose(&'a str, &'a MultiPoly),
}

pub fn poly_arith(a: &MultiPoly, op: PolyOp<'_>) -> Result<MultiPoly, PolyError> {
    Ok(match op {
        PolyOp::Add(b) => a + b,
        PolyOp::Sub(b) => a - b,
        PolyOp::Mul(b) => a * b,
        PolyOp::Pow(k) => a.pow(k)?,
        PolyOp::Compose(name, b) => a.compose(name, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, rat_frac};
    use proptest::prelude::*;

    fn y() -> MultiPoly {
        MultiPoly::var("Y")
    }

    fn c(n: i64) -> MultiPoly {
        MultiPoly::constant(&["Y"], rat(n))
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&y() - &c(1)) * &(&y() + &c(1));
        assert_eq!(p.to_string(), "Y^2 - 1");
    }

    #[test]
    fn cube_by_binomial_expansion() {
        let p = poly_arith(&(&y() - &c(2)), PolyOp::Pow(3)).unwrap();
        assert_eq!(p.to_string(), "Y^3 - 6*Y^2 + 12*Y - 8");
        assert_eq!(
            poly_arith(&y(), PolyOp::Pow(-1)),
            Err(PolyError::NegativeExponent(-1))
        );
    }

    #[test]
    fn zero_is_additive_identity() {
        let p = parse_poly("3*X*Y - Y^2 + 1/2").unwrap();
        let z = MultiPoly::zero(&["Z"]);
        assert_eq!(poly_arith(&z, PolyOp::Add(&p)).unwrap(), p);
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn display_is_canonical() {
        let p = parse_poly("11 - 6*Y + Y^2").unwrap();
        assert_eq!(p.to_string(), "Y^2 - 6*Y + 11");
        let q = parse_poly_in("-Y + 1/2*X^2*Y - X", &["X", "Y"]).unwrap();
        assert_eq!(q.to_string(), "1/2*X^2*Y - X - Y");
        assert_eq!(parse_poly(&q.to_string()).unwrap(), q);
        let r = parse_poly("-Y + 1/2*X^2*Y - X").unwrap();
        assert_eq!(r.to_string(), "1/2*Y*X^2 - Y - X");
        assert_eq!(parse_poly("-1").unwrap().to_string(), "-1");
    }

    #[test]
    fn compose_and_specialize() {
        let p = parse_poly("Y^2 + U*Y").unwrap();
        let q = p.compose("Y", &parse_poly("X + 1").unwrap());
        assert_eq!(q, parse_poly("X^2 + 2*X + 1 + U*X + U").unwrap());
        let s = p.specialize(&[("U", rat(3))]);
        assert_eq!(s.vars(), ["Y".to_string()]);
        assert_eq!(s, parse_poly("Y^2 + 3*Y").unwrap());
    }

    #[test]
    fn equality_ignores_variable_order_and_unused_variables() {
        let a = parse_poly_in("X + Y", &["X", "Y", "Z"]).unwrap();
        let b = parse_poly_in("Y + X", &["Y", "X"]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, parse_poly("X - Y").unwrap());
    }

    #[test]
    fn truncation_and_coefficients() {
        let p = parse_poly("Y^2 + T*Y + T^2*U").unwrap();
        assert_eq!(p.truncate_in("T", 2), parse_poly("Y^2 + T*Y").unwrap());
        assert_eq!(p.coefficient_of("T", 1), parse_poly("Y").unwrap());
        assert_eq!(p.derivative("Y"), parse_poly("2*Y + T").unwrap());
        assert_eq!(p.degree_in("T"), 2);
        assert_eq!(p.total_degree(), Some(3));
        assert_eq!(
            parse_poly("1/3").unwrap().as_constant(),
            Some(rat_frac(1, 3))
        );
    }

    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        proptest::collection::vec(((0u32..3, 0u32..3), -5i64..5), 0..6).prop_map(|terms| {
            MultiPoly::from_terms(
                &["X", "Y"],
                terms.into_iter().map(|((a, b), c)| (vec![a, b], rat(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_laws_hold_pointwise(a in arb_poly(), b in arb_poly(), x in -4i64..4, yv in -4i64..4) {
            let pt = [rat(x), rat(yv)];
            let ev = |p: &MultiPoly| p.eval_rational(&pt).unwrap();
            prop_assert_eq!(ev(&(&a * &b)), ev(&a) * ev(&b));
            prop_assert_eq!(ev(&(&a + &b)), ev(&a) + ev(&b));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(parse_poly_in(&a.to_string(), &["X", "Y"]).unwrap(), a);
        }
    }
}
