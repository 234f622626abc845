//! Rank certificates: independence of the first-order forms, their values
//! at sample points, and the tangent matrix of the one-parameter family.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{limit, HarnessError};
use crate::families::{ell_matrix, ell_matrix_mod};
use crate::linalg::{
    bareiss_rank, pivot_minor, rank_fp64, verify_witness_over_field, verify_witness_over_z,
    RankResult,
};
use crate::ring::{find_primitive_root, is_prime_u64, Field, Fp64};

/// Fixed 62-bit prime `2^62 - 57` used for modular certificates.
pub const CERT_PRIME: u64 = (1 << 62) - 57;
/// Largest `n` certified by exact elimination over Q.
pub const EXACT_RANK_LIMIT: u32 = 6;
/// Largest `n` certified modulo a prime.
pub const PRIME_RANK_LIMIT: u32 = 10;
/// Retries for rank-deficient random point draws.
pub const MAX_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankField {
    Rationals,
    Prime { p: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    /// Which construction produced the matrix.
    pub matrix_description: String,
    pub side: usize,
    pub rank: usize,
    pub field: RankField,
    /// `(row, col)` pivots selecting a nonsingular minor.
    pub witness: Vec<(usize, usize)>,
    /// Whether the witness minor was re-checked independently.
    pub witness_verified: bool,
    /// Conclusion about the rank over Q for modular certificates.
    pub over_q: Option<String>,
    pub notes: Vec<String>,
}

impl RankCertificate {
    pub fn is_full(&self) -> bool {
        self.rank == self.side
    }

    fn new(
        description: String,
        side: usize,
        field: RankField,
        result: RankResult,
        verified: bool,
    ) -> Self {
        let over_q = match field {
            RankField::Rationals => None,
            RankField::Prime { .. } if result.rank == side => Some("certified over Q".into()),
            RankField::Prime { .. } => Some("inconclusive over Q, escalate to exact".into()),
        };
        Self {
            matrix_description: description,
            side,
            rank: result.rank,
            field,
            witness: result.pivots,
            witness_verified: verified,
            over_q,
            notes: Vec::new(),
        }
    }
}

fn prime_field(p: u64) -> Result<Fp64, HarnessError> {
    if !is_prime_u64(p) {
        return Err(HarnessError::Precondition(format!("{p} is not prime")));
    }
    Ok(Fp64::new(p)?)
}

fn rank_limit(field: RankField) -> u32 {
    match field {
        RankField::Rationals => EXACT_RANK_LIMIT,
        RankField::Prime { .. } => PRIME_RANK_LIMIT,
    }
}

fn certify_z(description: String, matrix: Vec<Vec<BigInt>>) -> RankCertificate {
    let side = matrix.len();
    let result = bareiss_rank(matrix.clone());
    let verified = verify_witness_over_z(&matrix, &result);
    RankCertificate::new(description, side, RankField::Rationals, result, verified)
}

fn certify_fp(description: String, field: &Fp64, matrix: Vec<Vec<u64>>) -> RankCertificate {
    let side = matrix.len();
    let result = rank_fp64(field, matrix.clone());
    let verified = verify_witness_over_field(field, &matrix, &result);
    let p = field.modulus();
    RankCertificate::new(description, side, RankField::Prime { p }, result, verified)
}

/// Rank of the ℓ-matrix; `2^n` means `L_1..L_{2^n}` are linearly
/// independent.
pub fn independence_rank(n: u32, field: RankField) -> Result<RankCertificate, HarnessError> {
    limit("independence_rank", n, 1, rank_limit(field))?;
    let description = format!("ell-matrix (l_{{k,j}}) for n = {n}");
    Ok(match field {
        RankField::Rationals => certify_z(description, ell_matrix(n)?.entries),
        RankField::Prime { p } => {
            let f = prime_field(p)?;
            certify_fp(description, &f, ell_matrix_mod(n, &f)?)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    Explicit(Vec<Vec<i64>>),
    Seeded(u64),
}

/// One draw of sample points and the rank it produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub seed: Option<u64>,
    pub points: Vec<Vec<i64>>,
    pub rank: usize,
}

/// Seed for retry `attempt`; attempt 0 uses the caller's seed.
fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `2^n` points with coordinates in `[-2^n, 2^n]`.
fn sample_points(n: u32, seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = 1i64 << n;
    (0..1usize << n)
        .map(|_| (0..n).map(|_| rng.gen_range(-b..=b)).collect())
        .collect()
}

/// Monomial values `prod_i u_i^{[j]_i}` for `j < 2^n`, built by doubling.
fn monomials<T: Clone>(u: &[T], one: T, mul: impl Fn(&T, &T) -> T) -> Vec<T> {
    let mut m = vec![one];
    for ui in u {
        let hi: Vec<T> = m.iter().map(|x| mul(x, ui)).collect();
        m.extend(hi);
    }
    m
}

/// Matrix `(L_i(u_j))`, rows `i`, columns `j`, over Z.
fn lk_matrix_z(ell: &[Vec<BigInt>], points: &[Vec<i64>], signed: bool) -> Vec<Vec<BigInt>> {
    let mons: Vec<Vec<BigInt>> = crate::par::map(points, |u| {
        let u: Vec<BigInt> = u.iter().map(|&x| BigInt::from(x)).collect();
        monomials(&u, BigInt::one(), |a, b| a * b)
    });
    crate::par::map_range(ell.len(), |i| {
        let row = &ell[i];
        mons.iter()
            .map(|m| {
                let v: BigInt = row.iter().zip(m).map(|(a, b)| a * b).sum();
                if signed && i % 2 == 0 {
                    -v
                } else {
                    v
                }
            })
            .collect()
    })
}

fn lk_matrix_fp(f: &Fp64, ell: &[Vec<u64>], points: &[Vec<i64>], signed: bool) -> Vec<Vec<u64>> {
    let mons: Vec<Vec<u64>> = crate::par::map(points, |u| {
        let u: Vec<u64> = u.iter().map(|&x| f.from_i64(x)).collect();
        monomials(&u, f.one(), |a, b| f.mul(a, b))
    });
    crate::par::map_range(ell.len(), |i| {
        let row = &ell[i];
        mons.iter()
            .map(|m| {
                let v = row.iter().zip(m).fold(0u64, |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
                if signed && i % 2 == 0 {
                    f.neg(&v)
                } else {
                    v
                }
            })
            .collect()
    })
}

/// Rank of `(L_i(u_j))` for `2^n` points. Seeded draws are retried up to
/// [`MAX_RETRIES`] times on rank deficiency; every attempt is returned.
/// `signed` selects `L_k = (-1)^k ℓ_k` over the unsigned forms, which only
/// flips row signs.
pub fn lk_at_points_rank(
    n: u32,
    points: &PointSource,
    field: RankField,
    signed: bool,
) -> Result<(RankCertificate, Vec<Attempt>), HarnessError> {
    limit("lk_at_points_rank", n, 1, rank_limit(field))?;
    let side = 1usize << n;
    enum Ell {
        Z(Vec<Vec<BigInt>>),
        P(Fp64, Vec<Vec<u64>>),
    }
    let ell = match field {
        RankField::Rationals => Ell::Z(ell_matrix(n)?.entries),
        RankField::Prime { p } => {
            let f = prime_field(p)?;
            let m = ell_matrix_mod(n, &f)?;
            Ell::P(f, m)
        }
    };
    let run = |pts: &[Vec<i64>], seed: Option<u64>| {
        let description = match seed {
            Some(s) => format!("(L_i(u_j)) for n = {n}, points seeded {s} in [-2^n, 2^n]"),
            None => format!("(L_i(u_j)) for n = {n}, explicit points"),
        };
        let mut cert = match &ell {
            Ell::Z(e) => certify_z(description, lk_matrix_z(e, pts, signed)),
            Ell::P(f, e) => certify_fp(description, f, lk_matrix_fp(f, e, pts, signed)),
        };
        if !signed {
            cert.notes.push("unsigned forms".into());
        }
        cert
    };
    match points {
        PointSource::Explicit(pts) => {
            if pts.len() != side || pts.iter().any(|p| p.len() != n as usize) {
                return Err(HarnessError::Precondition(format!(
                    "expected {side} points in {n} coordinates"
                )));
            }
            let cert = run(pts, None);
            let attempt = Attempt {
                seed: None,
                points: pts.clone(),
                rank: cert.rank,
            };
            Ok((cert, vec![attempt]))
        }
        PointSource::Seeded(seed) => {
            let mut attempts = Vec::new();
            for k in 0..=MAX_RETRIES {
                let s = attempt_seed(*seed, k);
                let pts = sample_points(n, s);
                let mut cert = run(&pts, Some(s));
                attempts.push(Attempt {
                    seed: Some(s),
                    points: pts,
                    rank: cert.rank,
                });
                if cert.is_full() {
                    if k > 0 {
                        cert.notes.push(format!("full rank after {k} retries"));
                    }
                    return Ok((cert, attempts));
                }
                eprintln!("lk_at_points_rank: seed {s} gave rank {} < {side}, retrying", cert.rank);
            }
            Err(HarnessError::NoFullRankPoints(MAX_RETRIES))
        }
    }
}

/// Rank of `A = (d zeta^{kj})` for `0 <= k < d`, `-1 <= j < d` over `F_p`,
/// with `zeta` of order `d`.
pub fn tangent_rank_paradigm1(d: u64, p: u64) -> Result<RankCertificate, HarnessError> {
    if d == 0 || d > 64 {
        return Err(HarnessError::Precondition(format!("d = {d} must lie in 1..=64")));
    }
    let f = prime_field(p)?;
    if d.is_multiple_of(p) {
        return Err(HarnessError::Precondition(format!("p = {p} divides d = {d}")));
    }
    if !(p - 1).is_multiple_of(d) {
        return Err(HarnessError::Precondition(format!("d = {d} does not divide p - 1 = {}", p - 1)));
    }
    let zeta = find_primitive_root(&p.into(), d)?
        .to_u64()
        .expect("residue fits in u64");
    let dd = f.from_i64(d as i64);
    let zeta_inv = f.inv(&zeta)?;
    let matrix: Vec<Vec<u64>> = (0..d)
        .map(|k| {
            let mut row = vec![f.mul(&dd, &f.pow(&zeta_inv, k))];
            let step = f.pow(&zeta, k);
            let mut cur = dd;
            for _ in 0..d {
                row.push(cur);
                cur = f.mul(&cur, &step);
            }
            row
        })
        .collect();
    let side = d as usize;
    let result = rank_fp64(&f, matrix.clone());
    // The columns j = 0..d-1 form d times a Vandermonde matrix on the
    // distinct nodes zeta^k.
    let vandermonde = RankResult {
        rank: side,
        pivots: (0..side).map(|k| (k, k + 1)).collect(),
    };
    let minor = pivot_minor(&matrix, &vandermonde);
    let verified = rank_fp64(&f, minor).rank == side;
    let mut cert = RankCertificate::new(
        format!("tangent matrix (d zeta^(kj)) for d = {d}, zeta = {zeta}"),
        side,
        RankField::Prime { p },
        result,
        verified,
    );
    if verified {
        cert.witness = vandermonde.pivots;
    }
    cert.over_q = None;
    cert.notes.push(
        "finite-field transport: a Vandermonde matrix on distinct nodes is nonsingular over any \
         field; this instantiates the argument over F_p, not over C"
            .into(),
    );
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub n: u32,
    pub independent_directions: usize,
    /// `2^n` when both certificates have full rank.
    pub certified_lower_bound_m_star: Option<u64>,
    pub certificates: Vec<RankCertificate>,
    pub attempts: Vec<Attempt>,
}

/// Both certificates behind the output-size bound `m* >= 2^n`. Uses exact
/// elimination up to [`EXACT_RANK_LIMIT`] and [`CERT_PRIME`] beyond.
pub fn blowup_report(n: u32, seed: u64) -> Result<BlowupReport, HarnessError> {
    limit("blowup_report", n, 1, PRIME_RANK_LIMIT)?;
    let field = if n <= EXACT_RANK_LIMIT {
        RankField::Rationals
    } else {
        RankField::Prime { p: CERT_PRIME }
    };
    let (indep, lk) = crate::par::join(
        || independence_rank(n, field),
        || lk_at_points_rank(n, &PointSource::Seeded(seed), field, true),
    );
    let (indep, (lk, attempts)) = (indep?, lk?);
    let full = indep.is_full() && lk.is_full() && indep.witness_verified && lk.witness_verified;
    Ok(BlowupReport {
        n,
        independent_directions: indep.rank,
        certified_lower_bound_m_star: full.then_some(1u64 << n),
        certificates: vec![indep, lk],
        attempts,
    })
}

/// Value of `L_i` at `u`, for tests.
#[cfg(test)]
fn l_value(ell: &[Vec<BigInt>], n: u32, i: usize, u: &[i64]) -> BigInt {
    use crate::families::hypercube_monomial;
    use num_traits::Zero;
    (0..ell.len())
        .map(|j| {
            let m: BigInt = hypercube_monomial(n, j)
                .iter()
                .zip(u)
                .map(|(&e, &x)| if e == 1 { BigInt::from(x) } else { BigInt::one() })
                .product();
            &ell[i][j] * m
        })
        .fold(BigInt::zero(), |a, b| a + b)
}
