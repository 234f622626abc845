//! The hypercube product
//! `P_n(T, U, Y) = prod_{j=0}^{2^n-1} (Y - (j + T prod_i U_i^{[j]_i}))`,
//! where `[j]_i` is bit `i - 1` of `j`, and its first-order data modulo `T^2`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{indexed, FamilyError};
use crate::par;
use crate::poly::{product_of_linear_factors, MultiPoly};
use crate::ring::{Field, Fp64, Rational};
use crate::slp::{Slp, SlpBuilder};

/// Largest `n` for which the exact ℓ-matrix (side `2^n`) is materialized.
pub const EXACT_ELL_LIMIT: u32 = 9;
/// Largest `n` for the reduced ℓ-matrix over a word-sized prime.
pub const MOD_ELL_LIMIT: u32 = 12;
/// Largest `n` accepted by [`pn_specialized`].
pub const SPECIALIZED_LIMIT: u32 = 20;

fn check(what: &'static str, n: u32, max: u32) -> Result<(), FamilyError> {
    if n == 0 {
        return Err(FamilyError::InvalidArgument(format!("{what}: n must be positive")));
    }
    if n > max {
        return Err(FamilyError::SizeLimit { what, n, max });
    }
    Ok(())
}

/// Exponent vector of `prod_i U_i^{[j]_i}`.
pub fn hypercube_monomial(n: u32, j: usize) -> Vec<u32> {
    (0..n).map(|i| ((j >> i) & 1) as u32).collect()
}

/// Program for `P_n` with parameters `T, U_1..U_n` and variable `Y`.
pub fn pn_slp(n: u32) -> Slp {
    assert!(n >= 1);
    let size = 1usize << n;
    let mut params = vec!["T".to_string()];
    params.extend(indexed("U", n as usize));
    let mut b = SlpBuilder::new(&params, &["Y".to_string()]);
    let t = b.param(0);
    let y = b.var(0);
    // monomials[j] = prod U_i^{[j]_i}; monomials[0] is the constant 1
    let one = b.constant(Rational::one());
    let mut monomials = vec![one; size];
    for j in 1..size {
        let top = usize::BITS - 1 - j.leading_zeros();
        let rest = j & !(1 << top);
        let u = b.param(1 + top as usize);
        monomials[j] = if rest == 0 { u } else { b.mul(monomials[rest], u) };
    }
    let mut acc: Option<usize> = None;
    for (j, &m) in monomials.iter().enumerate() {
        let tm = if j == 0 { t } else { b.mul(t, m) };
        let root = if j == 0 {
            tm
        } else {
            let c = b.constant(Rational::from_integer(BigInt::from(j)));
            b.add(c, tm)
        };
        let factor = b.sub(y, root);
        acc = Some(match acc {
            None => factor,
            Some(a) => b.mul(a, factor),
        });
    }
    b.output(acc.expect("at least one factor"), None);
    b.finish()
}

/// Roots `j + t prod u_i^{[j]_i}` of the specialized product, in order of `j`.
pub fn pn_roots(n: u32, t: &Rational, u: &[Rational]) -> Vec<Rational> {
    assert_eq!(u.len(), n as usize);
    par::map_range(1usize << n, |j| {
        let mut m = t.clone();
        for (i, ui) in u.iter().enumerate() {
            if (j >> i) & 1 == 1 {
                m *= ui;
            }
        }
        Rational::from_integer(BigInt::from(j)) + m
    })
}

/// `P_n(t, u, Y)` as a univariate polynomial in `Y`, multiplied out by a
/// balanced product tree.
pub fn pn_specialized(n: u32, t: &Rational, u: &[Rational]) -> Result<MultiPoly, FamilyError> {
    check("pn_specialized", n, SPECIALIZED_LIMIT)?;
    if u.len() != n as usize {
        return Err(FamilyError::InvalidArgument(format!(
            "expected {n} values for U, got {}",
            u.len()
        )));
    }
    Ok(product_of_linear_factors("Y", &pn_roots(n, t, u)))
}

/// Entries `ℓ_{k,j} = e_{k-1}({0, ..., 2^n - 1} \ {j})`, stored with row
/// `k - 1` and column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllMatrix {
    pub n: u32,
    pub entries: Vec<Vec<BigInt>>,
}

impl EllMatrix {
    pub fn side(&self) -> usize {
        1 << self.n
    }

    /// Entry `ℓ_{k,j}` with `1 <= k <= 2^n`.
    pub fn get(&self, k: usize, j: usize) -> &BigInt {
        &self.entries[k - 1][j]
    }
}

/// Elementary symmetric values `e_0..e_N` of `{0, ..., N - 1}`, i.e. the
/// coefficients of `prod_j (x + j)` from the top.
fn elementary_symmetric(size: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); size + 1];
    e[0] = BigInt::one();
    for j in 0..size {
        let jb = BigInt::from(j);
        for k in (1..=j + 1).rev() {
            let add = &e[k - 1] * &jb;
            e[k] += add;
        }
    }
    e
}

/// Exact ℓ-matrix by synthetic division of `prod (x + j')` by `(x + j)`.
pub fn ell_matrix(n: u32) -> Result<EllMatrix, FamilyError> {
    check("ell_matrix", n, EXACT_ELL_LIMIT)?;
    let size = 1usize << n;
    let e = elementary_symmetric(size);
    let columns: Vec<Vec<BigInt>> = par::map_range(size, |j| {
        let jb = BigInt::from(j);
        let mut col = Vec::with_capacity(size);
        let mut q = BigInt::one();
        col.push(q.clone());
        for ek in e.iter().take(size).skip(1) {
            q = ek - &jb * &q;
            col.push(q.clone());
        }
        col
    });
    let entries = (0..size)
        .map(|k| columns.iter().map(|c| c[k].clone()).collect())
        .collect();
    Ok(EllMatrix { n, entries })
}

/// The ℓ-matrix reduced modulo the field's prime, same layout as
/// [`EllMatrix::entries`].
pub fn ell_matrix_mod(n: u32, field: &Fp64) -> Result<Vec<Vec<u64>>, FamilyError> {
    check("ell_matrix_mod", n, MOD_ELL_LIMIT)?;
    let size = 1usize << n;
    let mut e = vec![0u64; size + 1];
    e[0] = field.one();
    for j in 0..size {
        let jf = field.from_i64(j as i64);
        for k in (1..=j + 1).rev() {
            e[k] = field.add(&e[k], &field.mul(&e[k - 1], &jf));
        }
    }
    let columns: Vec<Vec<u64>> = par::map_range(size, |j| {
        let jf = field.from_i64(j as i64);
        let mut col = Vec::with_capacity(size);
        let mut q = field.one();
        col.push(q);
        for ek in e.iter().take(size).skip(1) {
            q = field.sub_mul(*ek, jf, q);
            col.push(q);
        }
        col
    });
    Ok((0..size)
        .map(|k| columns.iter().map(|c| c[k]).collect())
        .collect())
}

/// Coefficients of `P_n` modulo `T^2`: the coefficient of `Y^{2^n - k}` is
/// `beta_k + T * sum_j l[k-1][j] * prod_i U_i^{[j]_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstOrder {
    pub n: u32,
    /// `true` for the actual coefficients, `false` for the variant with the
    /// factor `(-1)^k` dropped.
    pub signed: bool,
    pub beta: Vec<BigInt>,
    pub l: Vec<Vec<BigInt>>,
}

fn first_order(n: u32, signed: bool) -> Result<FirstOrder, FamilyError> {
    let ell = ell_matrix(n)?;
    let size = ell.side();
    let e = elementary_symmetric(size);
    let sign = |k: usize, x: BigInt| if signed && k % 2 == 1 { -x } else { x };
    let beta = (1..=size).map(|k| sign(k, e[k].clone())).collect();
    let l = ell
        .entries
        .into_iter()
        .enumerate()
        .map(|(row, entries)| entries.into_iter().map(|x| sign(row + 1, x)).collect())
        .collect();
    Ok(FirstOrder {
        n,
        signed,
        beta,
        l,
    })
}

/// The true first-order data `beta_k = (-1)^k e_k`, `L_k = (-1)^k ℓ_k`.
pub fn pn_first_order(n: u32) -> Result<FirstOrder, FamilyError> {
    first_order(n, true)
}

/// The unsigned variant `e_k`, `ℓ_k`.
pub fn pn_first_order_printed(n: u32) -> Result<FirstOrder, FamilyError> {
    first_order(n, false)
}

impl FirstOrder {
    /// Variables `[T, U_1, ..., U_n, Y]`.
    pub fn vars(&self) -> Vec<String> {
        let mut v = vec!["T".to_string()];
        v.extend(indexed("U", self.n as usize));
        v.push("Y".to_string());
        v
    }

    /// `Y^N + sum_k (beta_k + T L_k) Y^{N-k}` as a polynomial.
    pub fn truncated_poly(&self) -> MultiPoly {
        let n = self.n as usize;
        let size = 1usize << n;
        let width = n + 2;
        let mut terms = Vec::new();
        let mut lead = vec![0u32; width];
        lead[n + 1] = size as u32;
        terms.push((lead, Rational::one()));
        for k in 1..=size {
            let ydeg = (size - k) as u32;
            let mut e = vec![0u32; width];
            e[n + 1] = ydeg;
            terms.push((e, Rational::from_integer(self.beta[k - 1].clone())));
            for (j, c) in self.l[k - 1].iter().enumerate() {
                let mut e = vec![0u32; width];
                e[0] = 1;
                e[1..=n].copy_from_slice(&hypercube_monomial(self.n, j));
                e[n + 1] = ydeg;
                terms.push((e, Rational::from_integer(c.clone())));
            }
        }
        MultiPoly::from_terms(&self.vars(), terms)
    }

    /// `L_k` as a polynomial in `U_1..U_n`.
    pub fn l_form(&self, k: usize) -> MultiPoly {
        MultiPoly::from_terms(
            &indexed("U", self.n as usize),
            self.l[k - 1].iter().enumerate().map(|(j, c)| {
                (hypercube_monomial(self.n, j), Rational::from_integer(c.clone()))
            }),
        )
    }

    /// Whether every `L_1` coefficient is `±1`.
    pub fn first_row_is_unit(&self) -> bool {
        self.l[0].iter().all(|c| c.abs().is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{expand, interpolate, parse_poly_in, DEFAULT_BUDGET};
    use crate::ring::rat;

    fn row(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell_matrix(1).unwrap().entries, vec![row(&[1, 1]), row(&[1, 0])]);
        let m2 = ell_matrix(2).unwrap();
        assert_eq!(m2.entries[1], row(&[6, 5, 4, 3]));
        for n in 1..=5 {
            let m = ell_matrix(n).unwrap();
            assert!(m.entries[0].iter().all(|x| x.is_one()));
        }
        assert!(matches!(ell_matrix(EXACT_ELL_LIMIT + 1), Err(FamilyError::SizeLimit { .. })));
    }

    #[test]
    fn ell_matches_direct_symmetric_sums() {
        // brute force e_{k-1} over subsets for N = 8
        let size = 8usize;
        let m = ell_matrix(3).unwrap();
        for j in 0..size {
            let others: Vec<i64> = (0..size as i64).filter(|&x| x != j as i64).collect();
            let mut e = vec![0i64; size];
            for mask in 0u32..(1 << others.len()) {
                let mut prod = 1i64;
                for (b, &x) in others.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        prod *= x;
                    }
                }
                e[mask.count_ones() as usize] += prod;
            }
            for k in 1..=size {
                assert_eq!(m.get(k, j), &BigInt::from(e[k - 1]), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn ell_mod_agrees_with_exact() {
        let f = Fp64::new(1_000_000_007).unwrap();
        for n in 1..=6 {
            let exact = ell_matrix(n).unwrap();
            let reduced = ell_matrix_mod(n, &f).unwrap();
            for (a, b) in exact.entries.iter().zip(&reduced) {
                for (x, y) in a.iter().zip(b) {
                    assert_eq!(f.from_bigint(x), *y);
                }
            }
        }
    }

    #[test]
    fn ell_rows_have_exact_degree() {
        let n = 4;
        let m = ell_matrix(n).unwrap();
        let size = 1usize << n;
        let points: Vec<Vec<Rational>> = (0..size).map(|j| vec![rat(j as i64)]).collect();
        for k in 1..=size {
            let values: Vec<Rational> =
                m.entries[k - 1].iter().map(|x| Rational::from_integer(x.clone())).collect();
            let basis: Vec<Vec<u32>> = (0..k as u32).map(|d| vec![d]).collect();
            let c = interpolate(&points, &values, &basis).unwrap();
            assert!(!c[k - 1].is_zero(), "degree exactly k-1 for k={k}");
            assert!(c.iter().all(|x| x.is_integer()));
            if k >= 2 {
                let lower: Vec<Vec<u32>> = (0..k as u32 - 1).map(|d| vec![d]).collect();
                assert!(interpolate(&points, &values, &lower).is_err());
            }
        }
    }

    #[test]
    fn specialized_examples() {
        let y = |s: &str| parse_poly_in(s, &["Y"]).unwrap();
        assert_eq!(
            pn_specialized(2, &rat(0), &[rat(5), rat(7)]).unwrap(),
            y("Y^4 - 6*Y^3 + 11*Y^2 - 6*Y")
        );
        assert_eq!(pn_specialized(1, &rat(1), &[rat(1)]).unwrap(), y("Y^2 - 3*Y + 2"));
        assert_eq!(pn_specialized(1, &rat(0), &[rat(9)]).unwrap(), y("Y^2 - Y"));
    }

    #[test]
    fn first_order_n1() {
        let fo = pn_first_order(1).unwrap();
        assert_eq!(fo.beta, row(&[-1, 0]));
        let u = |s: &str| parse_poly_in(s, &["U_1"]).unwrap();
        assert_eq!(fo.l_form(1), u("-(1 + U_1)"));
        assert_eq!(fo.l_form(2), u("1"));
        let printed = pn_first_order_printed(1).unwrap();
        assert_eq!(printed.beta, row(&[1, 0]));
        assert_eq!(printed.l_form(1), u("1 + U_1"));
        assert!(fo.first_row_is_unit());
    }

    #[test]
    fn first_order_matches_expansion() {
        for n in 1..=3 {
            let full = expand(&pn_slp(n), 0, DEFAULT_BUDGET).unwrap();
            let trunc = full.truncate_in("T", 2);
            assert_eq!(trunc, pn_first_order(n).unwrap().truncated_poly(), "n = {n}");
            assert_ne!(trunc, pn_first_order_printed(n).unwrap().truncated_poly());
        }
    }

    #[test]
    fn slp_specializes_to_product() {
        let slp = pn_slp(3);
        assert_eq!(slp.profile().l_over_params, 7);
        let u = [rat(2), rat(-1), rat(3)];
        let poly = pn_specialized(3, &rat(5), &u).unwrap();
        for yv in [-2i64, 0, 7] {
            let mut params = vec![rat(5)];
            params.extend(u.iter().cloned());
            let v = slp.evaluate(&crate::ring::Rationals, &params, &[rat(yv)]).unwrap();
            assert_eq!(v[0], poly.eval_rational(&[rat(yv)]).unwrap());
        }
    }
}
