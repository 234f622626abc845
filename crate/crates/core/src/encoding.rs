//! Encodings by values: a polynomial is represented by its values on a fixed
//! test sequence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::poly::{interpolate, Exponents, InterpError, MultiPoly, PolyError};
use crate::ring::{Rational, Rationals};
use crate::sequences::{ClassEnum, TestSequence};
use crate::slp::{EvalError, Slp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCode {
    /// Fingerprint of the sequence the values were taken on.
    pub gamma_id: String,
    #[serde(with = "crate::ring::rational_vec_text")]
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("codes were taken on different sequences ({0} vs {1})")]
    SequenceMismatch(String, String),
    #[error("code has {got} values but the sequence has {expected} points")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Values of one program output at every sequence point, parameters fixed.
pub fn encode_slp(
    slp: &Slp,
    output: usize,
    params: &[Rational],
    gamma: &TestSequence,
) -> Result<ValueCode, EvalError> {
    let rows = slp.evaluate_batch(&Rationals, params, &gamma.points)?;
    Ok(ValueCode {
        gamma_id: gamma.fingerprint(),
        values: rows.into_iter().map(|mut r| r.swap_remove(output)).collect(),
    })
}

/// Values of `p` at every sequence point; `p`'s variables are read in the
/// order of the point coordinates.
pub fn encode_poly(p: &MultiPoly, gamma: &TestSequence) -> Result<ValueCode, PolyError> {
    let values = par::try_map_range(gamma.points.len(), |i| p.eval_rational(&gamma.points[i]))?;
    Ok(ValueCode {
        gamma_id: gamma.fingerprint(),
        values,
    })
}

/// The unique polynomial in the span of `basis` (monomials over `vars`)
/// taking the coded values.
pub fn decode<S: AsRef<str>>(
    code: &ValueCode,
    gamma: &TestSequence,
    vars: &[S],
    basis: &[Exponents],
) -> Result<MultiPoly, CodeError> {
    let id = gamma.fingerprint();
    if code.gamma_id != id {
        return Err(CodeError::SequenceMismatch(code.gamma_id.clone(), id));
    }
    if code.values.len() != gamma.points.len() {
        return Err(CodeError::Length {
            expected: gamma.points.len(),
            got: code.values.len(),
        });
    }
    let coeffs = interpolate(&gamma.points, &code.values, basis)?;
    Ok(MultiPoly::from_terms(
        vars,
        basis.iter().cloned().zip(coeffs),
    ))
}

pub fn code_eq(a: &ValueCode, b: &ValueCode) -> Result<bool, CodeError> {
    if a.gamma_id != b.gamma_id {
        return Err(CodeError::SequenceMismatch(
            a.gamma_id.clone(),
            b.gamma_id.clone(),
        ));
    }
    Ok(a.values == b.values)
}

/// Whether distinct members always receive distinct codes. Compares every
/// pair directly.
pub fn injectivity_check(gamma: &TestSequence, class: &ClassEnum) -> Result<bool, PolyError> {
    let codes = par::try_map_range(class.members.len(), |i| encode_poly(&class.members[i], gamma))?;
    let n = codes.len();
    let clash = par::find_first(n, |i| {
        (i + 1..n).any(|j| codes[i].values == codes[j].values && class.members[i] != class.members[j])
    });
    Ok(clash.is_none())
}
