//! Univariate helpers over Q: Euclidean gcd, square-free part and products
//! of linear factors. Dense coefficient vectors are stored lowest degree first.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{MultiPoly, PolyError};
use crate::par;
use crate::ring::Rational;

const DEFAULT_VAR: &str = "Y";

fn trim(v: &mut Vec<Rational>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Splits a univariate polynomial into its variable and dense coefficients.
/// Constants report the first declared variable (if any).
pub fn to_dense(p: &MultiPoly) -> Result<(Option<String>, Vec<Rational>), PolyError> {
    let used = p.used_vars();
    if used.len() > 1 {
        return Err(PolyError::NotUnivariate(used));
    }
    let var = used.first().cloned().or_else(|| p.vars().first().cloned());
    let idx = var.as_deref().and_then(|v| p.var_index(v));
    let deg = idx.map(|i| p.terms().map(|(e, _)| e[i]).max().unwrap_or(0)).unwrap_or(0);
    let mut out = vec![Rational::zero(); deg as usize + 1];
    for (e, c) in p.terms() {
        let k = idx.map(|i| e[i]).unwrap_or(0) as usize;
        out[k] = c.clone();
    }
    trim(&mut out);
    Ok((var, out))
}

pub fn from_dense(var: &str, coeffs: &[Rational]) -> MultiPoly {
    MultiPoly::from_terms(
        &[var],
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (vec![k as u32], c.clone())),
    )
}

pub fn derivative_dense(p: &[Rational]) -> Vec<Rational> {
    let mut d: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
        .collect();
    trim(&mut d);
    d
}

fn make_monic(mut p: Vec<Rational>) -> Vec<Rational> {
    if let Some(lead) = p.last().cloned() {
        if !lead.is_one() {
            for c in p.iter_mut() {
                *c = &*c / &lead;
            }
        }
    }
    p
}

/// Remainder of `a` modulo nonzero `b`.
fn rem(mut a: Vec<Rational>, b: &[Rational]) -> Vec<Rational> {
    let lead = b.last().expect("nonzero divisor");
    let db = b.len() - 1;
    trim(&mut a);
    while a.len() > db && !a.is_empty() {
        let shift = a.len() - 1 - db;
        let factor = a.last().unwrap() / lead;
        for (i, c) in b.iter().enumerate() {
            a[shift + i] -= &factor * c;
        }
        trim(&mut a);
    }
    a
}

/// Exact quotient of `a` by nonzero `b`; the remainder is discarded.
fn quo(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    trim(&mut r);
    let lead = b.last().expect("nonzero divisor");
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![];
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let factor = r.last().unwrap() / lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &factor * c;
        }
        q[shift] = factor;
        trim(&mut r);
    }
    trim(&mut q);
    q
}

fn gcd_dense(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(x, &y);
        x = y;
        y = r;
    }
    make_monic(x)
}

fn common_var(a: &MultiPoly, b: &MultiPoly) -> Result<String, PolyError> {
    let mut used = a.used_vars();
    for v in b.used_vars() {
        if !used.contains(&v) {
            used.push(v);
        }
    }
    match used.len() {
        0 => Ok(a
            .vars()
            .first()
            .or_else(|| b.vars().first())
            .cloned()
            .unwrap_or_else(|| DEFAULT_VAR.to_string())),
        1 => Ok(used.remove(0)),
        _ => Err(PolyError::NotUnivariate(used)),
    }
}

/// Monic greatest common divisor of two univariate polynomials over Q.
pub fn uni_gcd(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly, PolyError> {
    let var = common_var(a, b)?;
    let (_, da) = to_dense(a)?;
    let (_, db) = to_dense(b)?;
    if da.is_empty() && db.is_empty() {
        return Err(PolyError::BothZero);
    }
    Ok(from_dense(&var, &gcd_dense(&da, &db)))
}

/// Monic square-free part `p / gcd(p, p')`.
pub fn squarefree_part(p: &MultiPoly) -> Result<MultiPoly, PolyError> {
    let var = common_var(p, p)?;
    let (_, dp) = to_dense(p)?;
    if dp.is_empty() {
        return Err(PolyError::ZeroPolynomial);
    }
    let g = gcd_dense(&dp, &derivative_dense(&dp));
    Ok(from_dense(&var, &make_monic(quo(&dp, &g))))
}

fn mul_dense_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

const PARALLEL_SPLIT: usize = 32;

/// Product of `den_i * Y - num_i` over a slice of roots, balanced tree.
fn tree_product(factors: &[(BigInt, BigInt)]) -> Vec<BigInt> {
    match factors.len() {
        0 => vec![BigInt::one()],
        1 => vec![-factors[0].0.clone(), factors[0].1.clone()],
        n => {
            let (l, r) = factors.split_at(n / 2);
            let (pl, pr) = if n >= PARALLEL_SPLIT {
                par::join(|| tree_product(l), || tree_product(r))
            } else {
                (tree_product(l), tree_product(r))
            };
            mul_dense_int(&pl, &pr)
        }
    }
}

/// Monic `prod (var - r)` over the given roots. Denominators are cleared so
/// the tree works over the integers; association order is fixed.
pub fn product_of_linear_factors(var: &str, roots: &[Rational]) -> MultiPoly {
    let factors: Vec<(BigInt, BigInt)> = roots
        .iter()
        .map(|r| (r.numer().clone(), r.denom().clone()))
        .collect();
    let ints = tree_product(&factors);
    let lead = ints.last().cloned().expect("nonempty");
    let coeffs: Vec<Rational> = ints
        .into_iter()
        .map(|c| Rational::new(c, lead.clone()))
        .collect();
    from_dense(var, &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::ring::{rat, rat_frac};

    fn p(s: &str) -> MultiPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(uni_gcd(&p("Y^2 - 1"), &p("Y^2 - 2*Y + 1")).unwrap(), p("Y - 1"));
        assert_eq!(uni_gcd(&p("Y"), &p("1")).unwrap().to_string(), "1");
        assert_eq!(uni_gcd(&p("0"), &p("Y^2")).unwrap(), p("Y^2"));
        assert_eq!(uni_gcd(&p("0"), &p("3*Y^2")).unwrap(), p("Y^2"));
        assert_eq!(uni_gcd(&p("0"), &p("0")), Err(PolyError::BothZero));
        assert!(matches!(
            uni_gcd(&p("X"), &p("Y")),
            Err(PolyError::NotUnivariate(_))
        ));
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(&p("(Y-1)^2*Y")).unwrap(), p("Y^2 - Y"));
        assert_eq!(squarefree_part(&p("Y^3")).unwrap(), p("Y"));
        assert_eq!(squarefree_part(&p("Y^2 - 1")).unwrap(), p("Y^2 - 1"));
        assert_eq!(squarefree_part(&p("2*Y^2 - 2")).unwrap(), p("Y^2 - 1"));
        assert_eq!(squarefree_part(&p("0")), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn squarefree_part_properties() {
        let samples = ["(Y-1)^3*(Y+2)^2*Y", "(2*Y-1)^4", "Y^5 - Y", "(Y^2+1)^2*(Y-3)"];
        for s in samples {
            let f = p(s);
            let q = squarefree_part(&f).unwrap();
            let dq = q.derivative("Y");
            assert_eq!(uni_gcd(&q, &dq).unwrap(), p("1"), "{s}");
            let (_, df) = to_dense(&f).unwrap();
            let (_, dqv) = to_dense(&q).unwrap();
            assert!(rem(df.clone(), &dqv).is_empty(), "q | p for {s}");
            // p | q^deg p
            let qpow = q.pow(df.len() as i64 - 1).unwrap();
            let (_, dqp) = to_dense(&qpow).unwrap();
            assert!(rem(dqp, &df).is_empty(), "p | q^deg for {s}");
        }
    }

    #[test]
    fn linear_factor_product() {
        let roots = [rat(0), rat(1), rat(2), rat(3)];
        assert_eq!(
            product_of_linear_factors("Y", &roots).to_string(),
            "Y^4 - 6*Y^3 + 11*Y^2 - 6*Y"
        );
        let roots = [rat_frac(1, 2), rat_frac(-2, 3), rat(5)];
        let mut naive = p("1");
        for r in &roots {
            naive = &naive * &(&p("Y") - &MultiPoly::constant(&["Y"], r.clone()));
        }
        assert_eq!(product_of_linear_factors("Y", &roots), naive);
        let many: Vec<_> = (0..100).map(|i| rat_frac(i, 7)).collect();
        let poly = product_of_linear_factors("Y", &many);
        for r in &many {
            assert_eq!(poly.eval_rational(&[r.clone()]).unwrap(), rat(0));
        }
        assert_eq!(product_of_linear_factors("Y", &[]).to_string(), "1");
    }
}
