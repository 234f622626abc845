//! Interpolation on a monomial basis and term counting.

use std::collections::HashSet;

use thiserror::Error;

use super::{Exponents, MultiPoly};
use crate::linalg::{solve_rational, SolveOutcome};
use crate::ring::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("points do not determine basis")]
    NotDetermined,
    #[error("values not in span")]
    NotInSpan,
    #[error("need at least as many points as basis monomials ({basis}), got {points}")]
    TooFewPoints { points: usize, basis: usize },
    #[error("point {index} has {got} coordinates, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        got: usize,
    },
}

fn monomial_value(point: &[Rational], exps: &[u32]) -> Rational {
    let mut acc = Rational::from_integer(1.into());
    for (x, &e) in point.iter().zip(exps) {
        if e > 0 {
            acc *= num_traits::pow(x.clone(), e as usize);
        }
    }
    acc
}

/// Coefficients `c` with `sum_i c_i * basis_i(points_j) = values_j` for all j.
pub fn interpolate(
    points: &[Vec<Rational>],
    values: &[Rational],
    basis: &[Exponents],
) -> Result<Vec<Rational>, InterpError> {
    assert_eq!(points.len(), values.len(), "one value per point");
    if points.len() < basis.len() {
        return Err(InterpError::TooFewPoints {
            points: points.len(),
            basis: basis.len(),
        });
    }
    let dim = basis.first().map_or(0, |b| b.len());
    for (index, p) in points.iter().enumerate() {
        if !basis.is_empty() && p.len() != dim {
            return Err(InterpError::Dimension {
                index,
                expected: dim,
                got: p.len(),
            });
        }
    }
    if basis.is_empty() {
        return if values.iter().all(|v| v == &Rational::from_integer(0.into())) {
            Ok(vec![])
        } else {
            Err(InterpError::NotInSpan)
        };
    }
    let design: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| basis.iter().map(|e| monomial_value(p, e)).collect())
        .collect();
    match solve_rational(&design, values) {
        SolveOutcome::Unique(c) => Ok(c),
        SolveOutcome::Singular => Err(InterpError::NotDetermined),
        SolveOutcome::Inconsistent => Err(InterpError::NotInSpan),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    All,
    /// Count distinct monomials in these variables, reading the polynomial
    /// with coefficients in the remaining ones.
    Restrict(Vec<String>),
}

pub fn count_terms(p: &MultiPoly, grouping: &Grouping) -> usize {
    match grouping {
        Grouping::All => p.num_terms(),
        Grouping::Restrict(names) => {
            let idx: Vec<usize> = names.iter().filter_map(|n| p.var_index(n)).collect();
            // stored terms are nonzero, so every projection has a nonzero coefficient
            let keys: HashSet<Vec<u32>> = p
                .terms()
                .map(|(e, _)| idx.iter().map(|&i| e[i]).collect())
                .collect();
            keys.len()
        }
    }
}
