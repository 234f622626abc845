//! Exact linear algebra: rational solves, fraction-free rank over Z and
//! rank over finite fields, each with a pivot witness.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::par;
use crate::ring::{Field, Fp64, Rational};

/// Result of a rank computation. `pivots` lists `(row, col)` in the original
/// indexing; the square submatrix they select is nonsingular.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub pivots: Vec<(usize, usize)>,
}

impl RankResult {
    pub fn pivot_rows(&self) -> Vec<usize> {
        self.pivots.iter().map(|p| p.0).collect()
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivots.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(Vec<Rational>),
    /// The coefficient matrix has a nontrivial kernel.
    Singular,
    /// Full column rank, but the right-hand side is not in the column span.
    Inconsistent,
}

/// Solves `a x = b` exactly for a matrix with at least as many rows as
/// columns.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> SolveOutcome {
    assert_eq!(a.len(), b.len());
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let rows = m.len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            return SolveOutcome::Singular;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * y;
            }
        }
        r += 1;
    }
    if m[cols..].iter().any(|row| !row[cols].is_zero()) {
        return SolveOutcome::Inconsistent;
    }
    SolveOutcome::Unique(m[..cols].iter().map(|row| row[cols].clone()).collect())
}

/// Rank over an arbitrary field by Gauss–Jordan elimination.
pub fn rank_over_field<F: Field>(field: &F, matrix: Vec<Vec<F::Elem>>) -> RankResult {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    let mut m: Vec<(usize, Vec<F::Elem>)> = matrix.into_iter().enumerate().collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !field.is_zero(&m[i].1[c])) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(&m[r].1[c]).expect("pivot is nonzero");
        for x in m[r].1.iter_mut().skip(c) {
            *x = field.mul(x, &inv);
        }
        pivots.push((m[r].0, c));
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r].1;
        par::for_each_mut(rest, |(_, row)| {
            if field.is_zero(&row[c]) {
                return;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pivot_row).skip(c) {
                *x = field.sub(x, &field.mul(&f, y));
            }
        });
        r += 1;
    }
    RankResult { rank: r, pivots }
}

/// Rank over a word-sized prime field; same algorithm as
/// [`rank_over_field`] with the inner update fused.
pub fn rank_fp64(field: &Fp64, matrix: Vec<Vec<u64>>) -> RankResult {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    let mut m: Vec<(usize, Vec<u64>)> = matrix
        .into_iter()
        .map(|row| row.into_iter().map(|x| field.reduce(x)).collect())
        .enumerate()
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i].1[c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(&m[r].1[c]).expect("pivot is nonzero");
        for x in m[r].1.iter_mut().skip(c) {
            *x = field.mul(x, &inv);
        }
        pivots.push((m[r].0, c));
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r].1;
        par::for_each_mut(rest, |(_, row)| {
            let f = row[c];
            if f == 0 {
                return;
            }
            for (x, &y) in row.iter_mut().zip(pivot_row).skip(c) {
                *x = field.sub_mul(*x, f, y);
            }
        });
        r += 1;
    }
    RankResult { rank: r, pivots }
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination. All
/// intermediate entries are minors of the input, so divisions are exact.
pub fn bareiss_rank(matrix: Vec<Vec<BigInt>>) -> RankResult {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    let mut m: Vec<(usize, Vec<BigInt>)> = matrix.into_iter().enumerate().collect();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i].1[c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        pivots.push((m[r].0, c));
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r].1;
        let pivot = pivot_row[c].clone();
        let divisor = prev.clone();
        par::for_each_mut(rest, |(_, row)| {
            let f = row[c].clone();
            for j in c..cols {
                let v = &pivot * &row[j] - &f * &pivot_row[j];
                row[j] = v / &divisor;
            }
        });
        prev = pivot;
        r += 1;
    }
    RankResult { rank: r, pivots }
}

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_det(matrix: Vec<Vec<BigInt>>) -> BigInt {
    let n = matrix.len();
    assert!(matrix.iter().all(|r| r.len() == n));
    let mut m = matrix;
    let mut prev = BigInt::one();
    let mut sign = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Extracts the square submatrix selected by a pivot witness.
pub fn pivot_minor<T: Clone>(matrix: &[Vec<T>], result: &RankResult) -> Vec<Vec<T>> {
    result
        .pivots
        .iter()
        .map(|&(r, _)| result.pivots.iter().map(|&(_, c)| matrix[r][c].clone()).collect())
        .collect()
}

/// Re-checks a witness over a field: the selected minor must have full rank.
pub fn verify_witness_over_field<F: Field>(
    field: &F,
    matrix: &[Vec<F::Elem>],
    result: &RankResult,
) -> bool {
    let minor = pivot_minor(matrix, result);
    rank_over_field(field, minor).rank == result.rank
}

/// Re-checks a witness over Z by computing the minor's determinant.
pub fn verify_witness_over_z(matrix: &[Vec<BigInt>], result: &RankResult) -> bool {
    !bareiss_det(pivot_minor(matrix, result)).is_zero() || result.rank == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, Rationals};
    use proptest::prelude::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn solve_cases() {
        let a = vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(1), rat(1), rat(1)],
            vec![rat(1), rat(2), rat(4)],
        ];
        assert_eq!(
            solve_rational(&a, &[rat(-1), rat(0), rat(3)]),
            SolveOutcome::Unique(vec![rat(-1), rat(0), rat(1)])
        );
        let sing = vec![vec![rat(1), rat(0)], vec![rat(1), rat(0)]];
        assert_eq!(solve_rational(&sing, &[rat(1), rat(1)]), SolveOutcome::Singular);
        let over = vec![vec![rat(1)], vec![rat(1)]];
        assert_eq!(solve_rational(&over, &[rat(1), rat(2)]), SolveOutcome::Inconsistent);
        assert_eq!(
            solve_rational(&over, &[rat(2), rat(2)]),
            SolveOutcome::Unique(vec![rat(2)])
        );
    }

    #[test]
    fn bareiss_small() {
        assert_eq!(bareiss_rank(big(&[&[1, 1], &[1, 0]])).rank, 2);
        assert_eq!(bareiss_rank(big(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]])).rank, 2);
        assert_eq!(bareiss_rank(big(&[&[0, 0], &[0, 0]])).rank, 0);
        assert_eq!(bareiss_det(big(&[&[1, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(bareiss_det(big(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]])), BigInt::from(6));
        let m = big(&[&[0, 2, 4], &[0, 1, 2], &[3, 0, 1]]);
        let r = bareiss_rank(m.clone());
        assert_eq!(r.rank, 2);
        assert!(verify_witness_over_z(&m, &r));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..4, c), r)
        })
    }

    proptest! {
        #[test]
        fn ranks_agree_across_methods(m in small_matrix()) {
            let z: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let q: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
            let rz = bareiss_rank(z.clone());
            let rq = rank_over_field(&Rationals, q.clone());
            prop_assert_eq!(rz.rank, rq.rank);
            prop_assert!(verify_witness_over_z(&z, &rz));
            prop_assert!(verify_witness_over_field(&Rationals, &q, &rq));
            let f = Fp64::new(1_000_003).unwrap();
            let mp: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect();
            let rp = rank_fp64(&f, mp.clone());
            prop_assert!(rp.rank <= rz.rank);
            prop_assert_eq!(rank_over_field(&f, mp).rank, rp.rank);
        }
    }
}
