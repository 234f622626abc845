//! Certificates and probes for the hypercube elimination problem: the
//! elimination polynomial itself, exact rank certificates for its
//! first-order data, tangent ranks for the one-parameter family, and
//! randomized robustness and distinctness probes.

mod probes;
mod rank;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{
    pn_first_order, FamilyError, FirstOrder, HypercubeFamily, EXACT_ELL_LIMIT, SPECIALIZED_LIMIT,
};
use crate::poly::{
    product_of_linear_factors, to_dense, uni_gcd, MultiPoly, PolyError, DEFAULT_BUDGET,
};
use crate::ring::{ArithError, Field, Fp64, Rational, Rationals};
use crate::slp::EvalError;

pub use probes::{
    distinctness_probe_gamma_n, robustness_probe, DistinctnessReport, Paradigm1Report,
    Paradigm2Report, Probe, ProbeReport,
};
pub use rank::{
    blowup_report, independence_rank, lk_at_points_rank, tangent_rank_paradigm1, Attempt,
    BlowupReport, PointSource, RankCertificate, RankField, CERT_PRIME, EXACT_RANK_LIMIT,
    MAX_RETRIES, PRIME_RANK_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("{what}: n = {n} exceeds the supported maximum {max}")]
    SizeLimit { what: &'static str, n: u32, max: u32 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("budget exceeded: {needed} > {budget}")]
    Budget { needed: u64, budget: u64 },
    #[error("no full-rank points found in {0} retries")]
    NoFullRankPoints(usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub(crate) fn limit(what: &'static str, n: u32, min: u32, max: u32) -> Result<(), HarnessError> {
    if n < min {
        return Err(HarnessError::Precondition(format!("{what}: n must be at least {min}")));
    }
    if n > max {
        return Err(HarnessError::SizeLimit { what, n, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElimMode {
    /// Parameter values in the program's parameter order.
    Specialized(Vec<Rational>),
    FirstOrder,
}

impl ElimMode {
    /// Parameters `(t, u_1, ..., u_n)` for the structured family.
    pub fn at(t: Rational, u: &[Rational]) -> Self {
        let mut p = vec![t];
        p.extend(u.iter().cloned());
        ElimMode::Specialized(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElimResult {
    Specialized(MultiPoly),
    FirstOrder(FirstOrder),
}

impl ElimResult {
    pub fn specialized(self) -> Option<MultiPoly> {
        match self {
            ElimResult::Specialized(p) => Some(p),
            ElimResult::FirstOrder(_) => None,
        }
    }
}

/// Elimination polynomial `prod_{e in {0,1}^n} (Y - F(e))`.
///
/// Specialized mode evaluates the program at every vertex and multiplies
/// the linear factors; `budget` caps the degree `2^n`. First-order mode
/// is available for the structured family only.
pub fn eliminate_hypercube(
    fam: &HypercubeFamily,
    mode: &ElimMode,
    budget: u64,
) -> Result<ElimResult, HarnessError> {
    match mode {
        ElimMode::FirstOrder => {
            if !fam.structured {
                return Err(HarnessError::Precondition(
                    "first-order mode needs the structured family".into(),
                ));
            }
            limit("eliminate_hypercube", fam.n, 1, EXACT_ELL_LIMIT)?;
            Ok(ElimResult::FirstOrder(pn_first_order(fam.n)?))
        }
        ElimMode::Specialized(params) => {
            limit("eliminate_hypercube", fam.n, 1, SPECIALIZED_LIMIT)?;
            let size = 1u64 << fam.n;
            if size > budget {
                return Err(HarnessError::Budget {
                    needed: size,
                    budget,
                });
            }
            let n = fam.n as usize;
            let vertices: Vec<Vec<Rational>> = (0..size as usize)
                .map(|j| (0..n).map(|i| Rational::from_integer(((j >> i) & 1).into())).collect())
                .collect();
            let values = fam.slp.evaluate_batch(&Rationals, params, &vertices)?;
            let roots: Vec<Rational> = values.into_iter().map(|mut v| v.swap_remove(0)).collect();
            Ok(ElimResult::Specialized(product_of_linear_factors("Y", &roots)))
        }
    }
}

/// Default degree budget for [`eliminate_hypercube`].
pub const ELIM_BUDGET: u64 = DEFAULT_BUDGET as u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub separable: bool,
    pub gcd_with_derivative: MultiPoly,
}

/// Primes for the modular separability screen.
const SCREEN_PRIMES: [u64; 3] = [CERT_PRIME, 2_305_843_009_213_693_951, 4_611_686_018_427_387_817];

fn gcd_mod(f: &Fp64, mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = f.inv(b.last().expect("nonempty")).expect("nonzero");
        while a.len() >= b.len() {
            let q = f.mul(a.last().expect("nonempty"), &inv);
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[shift + i] = f.sub_mul(a[shift + i], q, *c);
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// True if `gcd(p, p') = 1` modulo a prime not dividing the leading
/// coefficient, which implies the same over Q. False means unknown.
fn coprime_to_derivative_mod_p(coeffs: &[Rational]) -> bool {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::One;
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * &lcm).to_integer()).collect();
    let deg = ints.len() - 1;
    SCREEN_PRIMES.iter().any(|&p| {
        let f = Fp64::new(p).expect("prime");
        let a: Vec<u64> = ints.iter().map(|c| f.from_bigint(c)).collect();
        if a[deg] == 0 || (deg as u64) >= p {
            return false;
        }
        let da: Vec<u64> = (1..=deg)
            .map(|k| f.mul(&a[k], &f.reduce(k as u64)))
            .collect();
        gcd_mod(&f, a, da).len() == 1
    })
}

/// Separable iff `gcd(p, p') = 1`. A modular screen settles the common
/// case; the exact gcd is computed only when it is inconclusive.
pub fn separability_check(p: &MultiPoly) -> Result<SeparabilityReport, HarnessError> {
    if p.is_zero() {
        return Err(HarnessError::Precondition("zero polynomial".into()));
    }
    let used = p.used_vars();
    if used.len() > 1 {
        return Err(PolyError::NotUnivariate(used).into());
    }
    let (_, dense) = to_dense(p)?;
    if dense.len() > 1 && coprime_to_derivative_mod_p(&dense) {
        let var = used.first().cloned().expect("nonconstant");
        return Ok(SeparabilityReport {
            separable: true,
            gcd_with_derivative: MultiPoly::constant(&[var], Rational::from_integer(1.into())),
        });
    }
    let derivative = match used.first() {
        Some(v) => p.derivative(v),
        None => MultiPoly::zero(p.vars()),
    };
    let g = uni_gcd(p, &derivative)?;
    Ok(SeparabilityReport {
        separable: g.as_constant().is_some(),
        gcd_with_derivative: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{fn_slp, pn_specialized};
    use crate::poly::parse_poly;
    use crate::ring::{rat, rat_frac};
    use crate::slp::parse_slp;

    fn spec(n: u32, t: i64, u: &[i64]) -> MultiPoly {
        let u: Vec<Rational> = u.iter().map(|&x| rat(x)).collect();
        eliminate_hypercube(&fn_slp(n), &ElimMode::at(rat(t), &u), ELIM_BUDGET)
            .unwrap()
            .specialized()
            .unwrap()
    }

    #[test]
    fn elimination_examples() {
        assert_eq!(spec(2, 0, &[5, 7]), parse_poly("Y^4 - 6*Y^3 + 11*Y^2 - 6*Y").unwrap());
        let expected = (1..=8).fold(parse_poly("1").unwrap(), |acc, j| {
            &acc * &parse_poly(&format!("Y - {j}")).unwrap()
        });
        assert_eq!(spec(3, 1, &[1, 1, 1]), expected);
        let x1 = HypercubeFamily::custom(parse_slp("slp v1\nvar X_1\noutput X_1\n").unwrap()).unwrap();
        let p = eliminate_hypercube(&x1, &ElimMode::Specialized(vec![]), ELIM_BUDGET)
            .unwrap()
            .specialized()
            .unwrap();
        assert_eq!(p, parse_poly("Y^2 - Y").unwrap());
    }

    #[test]
    fn elimination_matches_product() {
        let u = vec![rat(3), rat_frac(-1, 2), rat(5)];
        let mode = ElimMode::at(rat_frac(2, 3), &u);
        let p = eliminate_hypercube(&fn_slp(3), &mode, ELIM_BUDGET).unwrap().specialized().unwrap();
        assert_eq!(p, pn_specialized(3, &rat_frac(2, 3), &u).unwrap());
    }


    #[test]
    fn elimination_limits() {
        let mode = ElimMode::at(rat(0), &vec![rat(1); 4]);
        assert!(matches!(
            eliminate_hypercube(&fn_slp(4), &mode, 8),
            Err(HarnessError::Budget { .. })
        ));
        let custom = HypercubeFamily::custom(fn_slp(2).slp).unwrap();
        assert!(eliminate_hypercube(&custom, &ElimMode::FirstOrder, ELIM_BUDGET).is_err());
        let fo = eliminate_hypercube(&fn_slp(2), &ElimMode::FirstOrder, ELIM_BUDGET).unwrap();
        assert!(matches!(fo, ElimResult::FirstOrder(f) if f.n == 2));
    }

    #[test]
    fn separability_examples() {
        assert!(separability_check(&spec(2, 1, &[2, 3])).unwrap().separable);
        let sq = separability_check(&parse_poly("(Y - 1)^2").unwrap()).unwrap();
        assert!(!sq.separable);
        assert_eq!(sq.gcd_with_derivative, parse_poly("Y - 1").unwrap());
        assert!(separability_check(&parse_poly("Y*(Y-1)*(Y-2)*(Y-3)").unwrap()).unwrap().separable);
        assert!(separability_check(&parse_poly("0").unwrap()).is_err());
        assert!(separability_check(&parse_poly("X*Y").unwrap()).is_err());
    }

    #[test]
    fn separability_screen_handles_large_degree() {
        // Roots lie in [j, j + 1/3], hence are distinct.
        let u: Vec<Rational> = (1..=9).map(|i| rat_frac(i, i + 1)).collect();
        let p = pn_specialized(9, &rat_frac(1, 3), &u).unwrap();
        let r = separability_check(&p).unwrap();
        assert!(r.separable);
        assert_eq!(r.gcd_with_derivative.to_string(), "1");
        // A repeated root must still be found by the exact path.
        let small = pn_specialized(3, &rat_frac(1, 3), &u[..3]).unwrap();
        let sq = &small * &parse_poly("Y - 1/2").unwrap().pow(2).unwrap();
        assert!(!separability_check(&sq).unwrap().separable);
    }
}
