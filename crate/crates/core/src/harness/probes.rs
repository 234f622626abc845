//! Robustness probes for both paradigms and the distinctness probe for the
//! identification sequence of the cone `R_n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{limit, HarnessError};
use crate::families::{omega_d, phi_constraints, pn_specialized, rn_closed_form, rn_slp, sample_gamma};
use crate::ring::{is_prime_u64, rat, Fp64, Rational, Rationals};

/// Largest prime accepted by the paradigm-one fiber enumeration.
const FIBER_PRIME_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "paradigm", rename_all = "snake_case")]
pub enum Probe {
    Paradigm1 { d: u64, p: u64 },
    Paradigm2 { n: u32, samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paradigm1Report {
    pub d: u64,
    pub p: u64,
    /// `{u in F_p : omega_d(u) = 0}` in increasing order.
    pub fiber: Vec<u64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paradigm2Report {
    pub n: u32,
    pub samples: usize,
    pub seed: u64,
    /// Whether `P_n(0, u, Y)` is the same for every sampled `u`.
    pub t0_constant: bool,
    pub t0_polynomial: String,
    /// Whether `P_n(1, u, Y)` takes at least two values.
    pub t1_varies: bool,
    /// Indices of two samples with different `t = 1` slices.
    pub t1_witness: Option<(usize, usize)>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeReport {
    Paradigm1(Paradigm1Report),
    Paradigm2(Paradigm2Report),
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        match self {
            ProbeReport::Paradigm1(r) => r.passed,
            ProbeReport::Paradigm2(r) => r.passed,
        }
    }
}

fn small_ints(rng: &mut ChaCha8Rng, count: usize, bound: i64) -> Vec<Rational> {
    (0..count).map(|_| rat(rng.gen_range(-bound..=bound))).collect()
}

pub fn robustness_probe(probe: &Probe) -> Result<ProbeReport, HarnessError> {
    match *probe {
        Probe::Paradigm1 { d, p } => {
            if d == 0 || !is_prime_u64(p) || (p - 1) % d != 0 {
                return Err(HarnessError::Precondition(format!(
                    "need a prime p with d | p - 1, got d = {d}, p = {p}"
                )));
            }
            if p > FIBER_PRIME_LIMIT {
                return Err(HarnessError::Budget {
                    needed: p,
                    budget: FIBER_PRIME_LIMIT,
                });
            }
            let f = Fp64::new(p)?;
            let hits = crate::par::map_range(p as usize, |u| {
                omega_d(&f, d, &(u as u64)).iter().all(|&x| x == 0)
            });
            let fiber: Vec<u64> = (0..p).filter(|&u| hits[u as usize]).collect();
            let passed = fiber.len() as u64 == d;
            Ok(ProbeReport::Paradigm1(Paradigm1Report { d, p, fiber, passed }))
        }
        Probe::Paradigm2 { n, samples, seed } => {
            limit("robustness_probe", n, 1, 10)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let us: Vec<Vec<Rational>> = (0..samples)
                .map(|_| small_ints(&mut rng, n as usize, 1 << n))
                .collect();
            let zero = rat(0);
            let one = rat(1);
            let t0 = crate::par::try_map_range(samples, |i| pn_specialized(n, &zero, &us[i]))?;
            let t1 = crate::par::try_map_range(samples, |i| pn_specialized(n, &one, &us[i]))?;
            let t0_constant = t0.windows(2).all(|w| w[0] == w[1]);
            let t1_witness = (1..samples).find(|&i| t1[i] != t1[0]).map(|i| (0, i));
            let t1_varies = t1_witness.is_some();
            Ok(ProbeReport::Paradigm2(Paradigm2Report {
                n,
                samples,
                seed,
                t0_constant,
                t0_polynomial: t0.first().map(|p| p.to_string()).unwrap_or_default(),
                t1_varies,
                t1_witness,
                passed: t0_constant && (samples < 2 || t1_varies),
            }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub first: Vec<i64>,
    pub second: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctnessReport {
    pub n: u32,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Pairs whose polynomials differ.
    pub distinct_pairs: usize,
    /// Pairs with equal polynomials, excluded from the statistics.
    pub equal_pairs: usize,
    /// Distinct pairs whose value vectors nevertheless agree.
    pub counterexamples: Vec<Counterexample>,
}

/// Samples pairs of parameter points `(z, t, u)` and checks that distinct
/// members of the cone have distinct value vectors at `gamma_n`.
pub fn distinctness_probe_gamma_n(
    n: u32,
    trials: usize,
    seed: u64,
) -> Result<DistinctnessReport, HarnessError> {
    limit("distinctness_probe_gamma_n", n, 2, 8)?;
    let m = phi_constraints(n);
    let gamma: Vec<Vec<Rational>> = sample_gamma(n, m, seed)
        .into_iter()
        .map(|g| g.into_iter().map(rat).collect())
        .collect();
    let closed = rn_closed_form(n);
    let slp = rn_slp(n);
    let width = n as usize + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d157);
    // Small ranges so that equal members (e.g. both with z = 0) occur.
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = (0..trials)
        .map(|_| {
            let mut draw = || {
                (0..width)
                    .map(|i| if i == 0 { rng.gen_range(-1i64..=1) } else { rng.gen_range(-2i64..=2) })
                    .collect::<Vec<_>>()
            };
            loop {
                let (a, b) = (draw(), draw());
                if a != b {
                    return (a, b);
                }
            }
        })
        .collect();
    let names: Vec<String> = closed.vars()[..width].to_vec();
    let outcomes = crate::par::try_map_range(trials, |k| -> Result<Option<bool>, HarnessError> {
        let (a, b) = &pairs[k];
        let member = |p: &[i64]| {
            let assignment: Vec<(&str, Rational)> =
                names.iter().zip(p).map(|(v, &x)| (v.as_str(), rat(x))).collect();
            closed.specialize(&assignment)
        };
        if member(a) == member(b) {
            return Ok(None);
        }
        let values = |p: &[i64]| -> Result<Vec<Rational>, HarnessError> {
            let params: Vec<Rational> = p.iter().map(|&x| rat(x)).collect();
            let rows = slp.evaluate_batch(&Rationals, &params, &gamma)?;
            Ok(rows.into_iter().map(|mut r| r.swap_remove(0)).collect())
        };
        Ok(Some(values(a)? == values(b)?))
    })?;
    let mut report = DistinctnessReport {
        n,
        m,
        trials,
        seed,
        distinct_pairs: 0,
        equal_pairs: 0,
        counterexamples: Vec::new(),
    };
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            None => report.equal_pairs += 1,
            Some(collide) => {
                report.distinct_pairs += 1;
                if collide {
                    report.counterexamples.push(Counterexample {
                        first: pairs[k].0.clone(),
                        second: pairs[k].1.clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::least_prime_congruent_one;

    #[test]
    fn paradigm1_fibers() {
        let r = robustness_probe(&Probe::Paradigm1 { d: 4, p: 5 }).unwrap();
        assert!(r.passed());
        let ProbeReport::Paradigm1(r) = r else { panic!() };
        assert_eq!(r.fiber, vec![1, 2, 3, 4]);
        for d in 2..=12 {
            let p = least_prime_congruent_one(d, 100);
            assert!(robustness_probe(&Probe::Paradigm1 { d, p }).unwrap().passed(), "d = {d}");
        }
        assert!(robustness_probe(&Probe::Paradigm1 { d: 3, p: 5 }).is_err());
    }

    #[test]
    fn paradigm2_slices() {
        let r = robustness_probe(&Probe::Paradigm2 { n: 2, samples: 20, seed: 1 }).unwrap();
        let ProbeReport::Paradigm2(r) = r else { panic!() };
        assert!(r.t0_constant && r.t1_varies && r.passed);
        assert_eq!(r.t0_polynomial, "Y^4 - 6*Y^3 + 11*Y^2 - 6*Y");
        let empty = robustness_probe(&Probe::Paradigm2 { n: 2, samples: 0, seed: 1 }).unwrap();
        assert!(empty.passed());
    }

    #[test]
    fn distinctness_small() {
        let r = distinctness_probe_gamma_n(3, 60, 4).unwrap();
        assert_eq!(r.distinct_pairs + r.equal_pairs, 60);
        assert!(r.counterexamples.is_empty());
        assert!(r.equal_pairs > 0, "z = 0 pairs should appear");
        let none = distinctness_probe_gamma_n(3, 0, 4).unwrap();
        assert_eq!((none.distinct_pairs, none.equal_pairs), (0, 0));
    }
}
