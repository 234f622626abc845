//! Prenex existential formulas describing the cone `R_n` on an
//! identification sequence.
//!
//! Grammar of the serialization (one conjunct per line):
//!
//! ```text
//! formula  := "exists " names ":" conjuncts
//! names    := name ("," name)*
//! conjuncts:= ("\n  " conjunct) ("\n  & " conjunct)*
//! ```
//!
//! The circuit variant writes each constraint as an application
//! `S_k = R_n(Z,T,U_1,...,U_n; g_1,...,g_n)` referring to the program
//! [`rn_slp`](super::rn_slp). The sparse variant replaces each application
//! by its own copy of the chain `G~_{n+1}..G~_{3n-1}` in fresh variables
//! `V<k>_<j>`, closed by `S_k - Z*V<k>_<2n-1> - Z*T*V<k>_<3n-1> = 0`;
//! coefficients `2^e` are written in power notation. Instance `0` carries
//! the free output `Y` evaluated at `X_1..X_n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hypercube::gtilde_chain_text;
use super::{indexed, FamilyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiVariant {
    Circuit,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiFormula {
    pub n: u32,
    pub variant: PhiVariant,
    pub text: String,
    /// Character count of `text`.
    pub length: usize,
    pub m: usize,
    pub gamma: Vec<Vec<i64>>,
    pub gamma_seed: u64,
    pub bounded_variables: usize,
}

/// The JSON sidecar emitted next to the formula text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiSidecar {
    pub n: u32,
    pub m: usize,
    pub length: usize,
    pub gamma_seed: u64,
}

impl PhiFormula {
    pub fn sidecar(&self) -> PhiSidecar {
        PhiSidecar {
            n: self.n,
            m: self.m,
            length: self.length,
            gamma_seed: self.gamma_seed,
        }
    }
}

/// Number of identification constraints, `4n + 10`.
pub fn phi_constraints(n: u32) -> usize {
    4 * n as usize + 10
}

/// Samples `m` points of `Z^n` with entries in `[-3n^3, 3n^3]`.
pub fn sample_gamma(n: u32, m: usize, seed: u64) -> Vec<Vec<i64>> {
    let bound = 3 * i64::from(n).pow(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect()
}

fn wrap(v: i64) -> String {
    if v < 0 {
        format!("({v})")
    } else {
        v.to_string()
    }
}

pub fn phi_formula(n: u32, variant: PhiVariant, seed: u64) -> Result<PhiFormula, FamilyError> {
    if n < 2 {
        return Err(FamilyError::InvalidArgument("formula needs n >= 2".into()));
    }
    let nn = n as usize;
    let m = phi_constraints(n);
    let gamma = sample_gamma(n, m, seed);
    let xs = indexed("X", nn);
    let us = indexed("U", nn);

    let mut bound: Vec<String> = xs.clone();
    bound.push("Z".into());
    bound.push("T".into());
    bound.extend(us.iter().cloned());

    let mut conjuncts: Vec<String> = xs.iter().map(|x| format!("{x}^2 - {x} = 0")).collect();
    // Instance 0 is `Y` at `X`; instance k is `S_k` at `gamma_k`.
    let inputs: Vec<(String, Vec<String>)> = std::iter::once(("Y".to_string(), xs.clone()))
        .chain(
            gamma
                .iter()
                .enumerate()
                .map(|(k, g)| (format!("S_{}", k + 1), g.iter().map(|&v| wrap(v)).collect())),
        )
        .collect();

    match variant {
        PhiVariant::Circuit => {
            let head = format!("R_{n}(Z,T,{}; ", us.join(","));
            for (lhs, args) in inputs.iter().skip(1).chain(inputs.iter().take(1)) {
                conjuncts.push(format!("{lhs} = {head}{})", args.join(",")));
            }
        }
        PhiVariant::Sparse => {
            for (k, (lhs, args)) in inputs.iter().enumerate() {
                let aux = |j: usize| format!("V{k}_{j}");
                bound.extend((nn + 1..=3 * nn - 1).map(aux));
                let name = |j: usize| if j <= nn { args[j - 1].clone() } else { aux(j) };
                for eq in gtilde_chain_text(nn, name, true) {
                    conjuncts.push(format!("{eq} = 0"));
                }
                conjuncts.push(format!(
                    "{lhs} - Z*{} - Z*T*{} = 0",
                    aux(2 * nn - 1),
                    aux(3 * nn - 1)
                ));
            }
        }
    }

    let text = format!("exists {}:\n  {}", bound.join(","), conjuncts.join("\n  & "));
    Ok(PhiFormula {
        n,
        variant,
        length: text.chars().count(),
        text,
        m,
        gamma,
        gamma_seed: seed,
        bounded_variables: bound.len(),
    })
}
