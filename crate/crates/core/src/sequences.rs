//! Correct-test and identification sequences: bound formulas, seeded
//! sampling, exact verification against enumerated classes, and identity
//! testing of programs.

use std::collections::HashMap;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::par;
use crate::poly::{MultiPoly, PolyError};
use crate::ring::{Rational, Rationals};
use crate::slp::{EvalError, Slp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{field} must be at least {min}, got {got}")]
    OutOfRange {
        field: &'static str,
        min: u64,
        got: u64,
    },
}

/// Parameters of a constructible object class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub l: u64,
    pub t: u64,
    pub delta: u64,
    #[serde(default)]
    pub k: u64,
    #[serde(default = "one_u64")]
    pub delta1: u64,
    #[serde(default = "one_u64")]
    pub delta2: u64,
    #[serde(default)]
    pub deg_closure_override: Option<BigUint>,
}

fn one_u64() -> u64 {
    1
}

impl ClassSpec {
    pub fn new(l: u64, t: u64, delta: u64) -> Self {
        Self {
            l,
            t,
            delta,
            k: 0,
            delta1: 1,
            delta2: 1,
            deg_closure_override: None,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        for (field, got) in [
            ("L", self.l),
            ("t", self.t),
            ("Delta", self.delta),
            ("Delta2", self.delta2),
        ] {
            if got < 1 {
                return Err(SpecError::OutOfRange { field, min: 1, got });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CorrectTest,
    Identification,
    /// Identification for programs of nonscalar size `L` in `t` variables.
    CircuitClass,
}

pub fn required_length(spec: &ClassSpec, kind: Kind) -> u64 {
    match kind {
        Kind::CorrectTest => 2 * spec.l + 2,
        Kind::Identification => 4 * spec.l + 2,
        Kind::CircuitClass => {
            let s = spec.l + spec.t + 1;
            4 * s * s + 2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBounds {
    pub deg_d_bound: BigUint,
    pub deg_o_bound: BigUint,
}

/// `deg D <= (1 + K Δ1)^L` and `deg O <= (L+1) Δ2^L deg D`, without the
/// `(L+1)` factor when the closure is equidimensional.
pub fn degree_bounds(spec: &ClassSpec, equidimensional: bool) -> DegreeBounds {
    let l = spec.l as u32;
    let deg_d = BigUint::from(1 + spec.k * spec.delta1).pow(l);
    let mut deg_o = BigUint::from(spec.delta2).pow(l) * &deg_d;
    if !equidimensional {
        deg_o *= spec.l + 1;
    }
    DegreeBounds {
        deg_d_bound: deg_d,
        deg_o_bound: deg_o,
    }
}

/// Least `c >= 2` with `c^L >= Δ^(2L) * D`, i.e. `c >= Δ^2 D^(1/L)`.
fn ceil_root_bound(delta: u64, l: u64, deg: &BigUint) -> BigUint {
    let l32 = l as u32;
    let target = BigUint::from(delta).pow(2 * l32) * deg;
    // nth_root gives floor; bump by one if not exact
    let mut c = target.nth_root(l32);
    if c.pow(l32) < target {
        c += 1u32;
    }
    c.max(BigUint::from(2u32))
}

/// Smallest admissible `#M` for the given kind.
///
/// For the circuit class this is `2^(4(L+1))`. Otherwise it is the ceiling
/// of `Δ^2 (deg O)^(1/L)`, with `deg O` taken from the override or from the
/// worst-case bound `(L+1)((1 + K Δ1) Δ2)^L`. Never below 2.
pub fn required_set_size(spec: &ClassSpec, kind: Kind) -> BigUint {
    match kind {
        Kind::CircuitClass => BigUint::one() << (4 * (spec.l + 1)),
        Kind::CorrectTest | Kind::Identification => {
            let deg = spec
                .deg_closure_override
                .clone()
                .unwrap_or_else(|| degree_bounds(spec, false).deg_o_bound);
            ceil_root_bound(spec.delta, spec.l, &deg)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSequence {
    pub m: usize,
    pub t: usize,
    /// Coordinates are drawn from `{0, ..., set_size - 1}`.
    pub set_size: BigUint,
    pub seed: u64,
    pub points: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    m: usize,
    t: usize,
    #[serde(rename = "M")]
    set_size: serde_json::Value,
    seed: u64,
    #[serde(with = "crate::ring::rational_matrix_text")]
    points: Vec<Vec<Rational>>,
}

fn biguint_json(n: &BigUint) -> serde_json::Value {
    match n.to_u64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(n.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum SequenceFormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid sequence: {0}")]
    Invalid(String),
}

impl TestSequence {
    /// A sequence over explicit points; `set_size` is one more than the
    /// largest integer coordinate (or 1 when there is none).
    pub fn from_points(points: Vec<Vec<Rational>>) -> Self {
        let t = points.first().map_or(0, |p| p.len());
        let mut max = BigUint::zero();
        for x in points.iter().flatten() {
            if x.is_integer() {
                if let Some(v) = x.numer().to_biguint() {
                    max = max.max(v);
                }
            }
        }
        Self {
            m: points.len(),
            t,
            set_size: max + 1u32,
            seed: 0,
            points,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SequenceJson {
            m: self.m,
            t: self.t,
            set_size: biguint_json(&self.set_size),
            seed: self.seed,
            points: self.points.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SequenceFormatError> {
        let raw: SequenceJson = serde_json::from_str(text)?;
        let set_size = match &raw.set_size {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(BigUint::from)
                .ok_or_else(|| SequenceFormatError::Invalid("M must be a nonnegative integer".into()))?,
            serde_json::Value::String(s) => s
                .parse()
                .map_err(|_| SequenceFormatError::Invalid(format!("bad M {s:?}")))?,
            other => return Err(SequenceFormatError::Invalid(format!("bad M {other}"))),
        };
        if raw.points.len() != raw.m {
            return Err(SequenceFormatError::Invalid(format!(
                "m = {} but {} points given",
                raw.m,
                raw.points.len()
            )));
        }
        if let Some(i) = raw.points.iter().position(|p| p.len() != raw.t) {
            return Err(SequenceFormatError::Invalid(format!(
                "point {i} does not have {} coordinates",
                raw.t
            )));
        }
        Ok(Self {
            m: raw.m,
            t: raw.t,
            set_size,
            seed: raw.seed,
            points: raw.points,
        })
    }

    /// Stable identifier of the point list (hex SHA-256 of the JSON points).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.t.to_le_bytes());
        for p in &self.points {
            for x in p {
                h.update(x.to_string().as_bytes());
                h.update(b",");
            }
            h.update(b";");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Every coordinate is an integer in `[0, set_size)`.
    pub fn within_set(&self) -> bool {
        self.points.iter().flatten().all(|x| {
            x.is_integer()
                && x.numer()
                    .to_biguint()
                    .is_some_and(|v| v < self.set_size)
        })
    }
}

/// Per-coordinate generator: a pure function of `(seed, i, j)`.
fn coordinate_rng(seed: u64, i: u64, j: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&i.to_le_bytes());
    key[16..24].copy_from_slice(&j.to_le_bytes());
    key[24..].copy_from_slice(b"seqcoord");
    ChaCha8Rng::from_seed(key)
}

/// Draws an `m x t` sequence uniformly from `{0..set_size-1}`.
pub fn sample_points(m: usize, t: usize, set_size: &BigUint, seed: u64) -> TestSequence {
    let points = par::map_range(m, |i| {
        (0..t)
            .map(|j| {
                let mut rng = coordinate_rng(seed, i as u64, j as u64);
                let v = rng.gen_biguint_below(set_size);
                Rational::from_integer(v.into())
            })
            .collect()
    });
    TestSequence {
        m,
        t,
        set_size: set_size.clone(),
        seed,
        points,
    }
}

pub fn sample_sequence(spec: &ClassSpec, kind: Kind, seed: u64) -> TestSequence {
    let m = required_length(spec, kind) as usize;
    sample_points(m, spec.t as usize, &required_set_size(spec, kind), seed)
}

/// A finite class of polynomials over a common variable list.
#[derive(Debug, Clone)]
pub struct ClassEnum {
    pub vars: Vec<String>,
    pub members: Vec<MultiPoly>,
}

impl ClassEnum {
    pub fn new<S: AsRef<str>>(vars: &[S], members: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let members = members
            .into_iter()
            .map(|m| m.with_vars(vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            vars: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            members,
        })
    }

    /// `{a*Y + b : a, b in lo..=hi}` in the variable `var`.
    pub fn linear(var: &str, lo: i64, hi: i64) -> Self {
        let mut members = Vec::new();
        for a in lo..=hi {
            for b in lo..=hi {
                members.push(MultiPoly::from_terms(
                    &[var],
                    [(vec![1], Rational::from_integer(a.into())), (vec![0], Rational::from_integer(b.into()))],
                ));
            }
        }
        Self {
            vars: vec![var.to_string()],
            members,
        }
    }

    /// Members with duplicates (as polynomials) removed, first occurrence kept.
    pub fn distinct(&self) -> Vec<&MultiPoly> {
        let mut out: Vec<&MultiPoly> = Vec::new();
        for m in &self.members {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    /// Value vectors of every member at the sequence points.
    pub fn value_vectors(&self, gamma: &TestSequence) -> Result<Vec<Vec<Rational>>, PolyError> {
        par::try_map_range(self.members.len(), |i| {
            gamma
                .points
                .iter()
                .map(|p| self.members[i].eval_rational(p))
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestVerdict {
    pub holds: bool,
    /// Index of a nonzero member vanishing on the whole sequence.
    pub witness: Option<usize>,
}

pub fn is_correct_test_sequence(
    gamma: &TestSequence,
    class: &ClassEnum,
) -> Result<TestVerdict, PolyError> {
    let values = class.value_vectors(gamma)?;
    let witness = par::find_first(class.members.len(), |i| {
        !class.members[i].is_zero() && values[i].iter().all(|v| v.is_zero())
    });
    Ok(TestVerdict {
        holds: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentVerdict {
    pub holds: bool,
    /// Indices of two distinct members with equal values on the sequence.
    pub witness: Option<(usize, usize)>,
}

/// Buckets members by value vector; any bucket holding two distinct
/// polynomials refutes the sequence.
pub fn is_identification_sequence(
    gamma: &TestSequence,
    class: &ClassEnum,
) -> Result<IdentVerdict, PolyError> {
    let values = class.value_vectors(gamma)?;
    let mut buckets: HashMap<&[Rational], usize> = HashMap::new();
    let mut witness: Option<(usize, usize)> = None;
    for (i, v) in values.iter().enumerate() {
        match buckets.get(v.as_slice()) {
            Some(&j) if class.members[j] != class.members[i] => {
                witness = Some((j, i));
                break;
            }
            Some(_) => {}
            None => {
                buckets.insert(v.as_slice(), i);
            }
        }
    }
    Ok(IdentVerdict {
        holds: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum PitVerdict {
    Zero,
    NonZero { index: usize },
}

/// Identity test of one output of `slp` with parameters fixed to `params`.
pub fn pit(
    slp: &Slp,
    output: usize,
    params: &[Rational],
    gamma: &TestSequence,
) -> Result<PitVerdict, EvalError> {
    let values = slp.evaluate_batch(&Rationals, params, &gamma.points)?;
    Ok(
        match values.iter().position(|v| !v[output].is_zero()) {
            Some(index) => PitVerdict::NonZero { index },
            None => PitVerdict::Zero,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    CorrectTest,
    Identification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub class_index: usize,
    pub kind: ProbeKind,
    pub required_length: u64,
    pub passed: bool,
    pub note: Option<String>,
}

/// Checks one sequence against several enumerated classes.
pub fn universality_probe(
    gamma: &TestSequence,
    classes: &[(ClassSpec, ProbeKind, ClassEnum)],
) -> Result<Vec<ProbeEntry>, PolyError> {
    classes
        .iter()
        .enumerate()
        .map(|(class_index, (spec, kind, class))| {
            let required = match kind {
                ProbeKind::CorrectTest => required_length(spec, Kind::CorrectTest),
                ProbeKind::Identification => required_length(spec, Kind::Identification),
            };
            let (passed, note) = match kind {
                ProbeKind::CorrectTest => {
                    let v = is_correct_test_sequence(gamma, class)?;
                    (v.holds, v.witness.map(|w| format!("member {w} vanishes on the sequence")))
                }
                ProbeKind::Identification => {
                    let v = is_identification_sequence(gamma, class)?;
                    (
                        v.holds,
                        v.witness.map(|(a, b)| format!("members {a} and {b} share values")),
                    )
                }
            };
            let note = if (gamma.m as u64) < required {
                Some(format!(
                    "sequence length {} is below the required {required}",
                    gamma.m
                ))
                .or(note)
            } else {
                note
            };
            Ok(ProbeEntry {
                class_index,
                kind: *kind,
                required_length: required,
                passed,
                note,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly_in;
    use crate::ring::rat;
    use crate::slp::parse_slp;

    fn points(xs: &[i64]) -> TestSequence {
        TestSequence::from_points(xs.iter().map(|&x| vec![rat(x)]).collect())
    }

    fn class(members: &[&str]) -> ClassEnum {
        ClassEnum::new(
            &["Y"],
            members.iter().map(|m| parse_poly_in(m, &["Y"]).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn length_formulas() {
        let s = ClassSpec::new(2, 1, 1);
        assert_eq!(required_length(&s, Kind::Identification), 10);
        assert_eq!(required_length(&s, Kind::CircuitClass), 66);
        assert_eq!(required_length(&ClassSpec::new(1, 1, 1), Kind::CorrectTest), 4);
    }

    #[test]
    fn set_size_formulas() {
        let s = ClassSpec::new(2, 1, 1);
        assert_eq!(required_set_size(&s, Kind::CircuitClass), BigUint::from(4096u32));
        assert_eq!(required_set_size(&s, Kind::Identification), BigUint::from(2u32));
        // Δ = 3, L = 1, D = 2: 9 * 2 = 18
        let s = ClassSpec::new(1, 1, 3);
        assert_eq!(required_set_size(&s, Kind::CorrectTest), BigUint::from(18u32));
        // Δ = 1, L = 2, D = 10 via override: ceil(sqrt(10)) = 4
        let mut s = ClassSpec::new(2, 1, 1);
        s.deg_closure_override = Some(BigUint::from(10u32));
        assert_eq!(required_set_size(&s, Kind::Identification), BigUint::from(4u32));
    }

    #[test]
    fn degree_bound_examples() {
        let mut s = ClassSpec::new(2, 1, 1);
        s.k = 2;
        s.delta1 = 3;
        s.delta2 = 2;
        let b = degree_bounds(&s, false);
        assert_eq!(b.deg_d_bound, BigUint::from(49u32));
        assert_eq!(b.deg_o_bound, BigUint::from(588u32));
        assert_eq!(degree_bounds(&s, true).deg_o_bound, BigUint::from(196u32));
        let mut s = ClassSpec::new(3, 1, 1);
        s.delta1 = 7;
        assert_eq!(degree_bounds(&s, false).deg_d_bound, BigUint::one());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = ClassSpec::new(2, 1, 1);
        let a = sample_sequence(&s, Kind::Identification, 7);
        assert_eq!(a, sample_sequence(&s, Kind::Identification, 7));
        assert_eq!(a.m, 10);
        assert_eq!(a.t, 1);
        assert!(a.within_set());
        let back = TestSequence::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        let big = ClassSpec::new(20, 2, 1);
        let c = sample_sequence(&big, Kind::CircuitClass, 1);
        assert!(c.to_json().contains("\"M\":\""));
        assert_eq!(TestSequence::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn correct_test_examples() {
        assert!(is_correct_test_sequence(&points(&[3]), &class(&["0"])).unwrap().holds);
        let c = class(&["Y", "Y - 1", "Y*(Y-1)"]);
        let v = is_correct_test_sequence(&points(&[0, 1]), &c).unwrap();
        assert_eq!(v, TestVerdict { holds: false, witness: Some(2) });
        assert!(is_correct_test_sequence(&points(&[0, 1, 2]), &c).unwrap().holds);
    }

    #[test]
    fn identification_examples() {
        assert!(is_identification_sequence(&points(&[5]), &class(&["Y"])).unwrap().holds);
        let lin = ClassEnum::linear("Y", -2, 2);
        assert!(is_identification_sequence(&points(&[0, 4]), &lin).unwrap().holds);
        let v = is_identification_sequence(&points(&[3, 3, 3]), &lin).unwrap();
        assert!(!v.holds);
        let (a, b) = v.witness.unwrap();
        assert_ne!(lin.members[a], lin.members[b]);
    }

    #[test]
    fn pit_examples() {
        let gamma = points(&[0, 5, 9]);
        let zero = parse_slp("slp v1\nvar Y\nc = const 0\noutput c\n").unwrap();
        assert_eq!(pit(&zero, 0, &[], &gamma).unwrap(), PitVerdict::Zero);
        let f = parse_slp("slp v1\nvar Y\nc = const 1\ns = mul Y Y\nr = sub s c\noutput r\n").unwrap();
        assert_eq!(pit(&f, 0, &[], &gamma).unwrap(), PitVerdict::NonZero { index: 0 });
        let tricky = parse_slp(
            "slp v1\nvar Y\nc = const 1\na = sub Y c\nb = add Y c\np = mul a b\ns = mul Y Y\n\
             d = sub p s\nr = add d c\noutput r\n",
        )
        .unwrap();
        assert_eq!(pit(&tricky, 0, &[], &gamma).unwrap(), PitVerdict::Zero);
    }

    #[test]
    fn probe_reports() {
        assert!(universality_probe(&points(&[1]), &[]).unwrap().is_empty());
        let spec = ClassSpec::new(1, 1, 1);
        let lin = ClassEnum::linear("Y", -1, 1);
        let r = universality_probe(
            &points(&[2, 2, 2, 2, 2, 2]),
            &[(spec, ProbeKind::Identification, lin)],
        )
        .unwrap();
        assert!(!r[0].passed);
    }
}
