//! End-to-end checks of the toolkit's headline numbers, one per criterion.
//! Each check is deterministic given its seed; `max_n` caps the problem
//! sizes for quick runs.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{vc_shatter_oracle, vc_upper, wlt_vc_sandwich, VcVariant, SHATTER_BUDGET};
use crate::encoding::{decode, encode_poly};
use crate::families::{
    fn_closed_form, fn_product_part, fn_slp, phi_constraints, phi_formula, pn_first_order,
    pn_first_order_printed, pn_slp, pn_specialized, rn_slp, sample_gamma, PhiVariant,
};
use crate::harness::{
    blowup_report, eliminate_hypercube, independence_rank, robustness_probe,
    tangent_rank_paradigm1, ElimMode, Probe, RankField, CERT_PRIME, ELIM_BUDGET,
};
use crate::poly::{count_terms, expand, parse_poly, Exponents, Grouping, MultiPoly, DEFAULT_BUDGET};
use crate::ring::{least_prime_congruent_one, rat, rat_frac, Rational, Rationals};
use crate::sequences::{
    is_identification_sequence, required_length, required_set_size, sample_points, ClassEnum,
    ClassSpec, Kind,
};
use crate::slp::{Slp, SlpBuilder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

/// An outcome together with its running time, which is kept out of the
/// deterministic payload.
#[derive(Debug, Clone)]
pub struct Timed {
    pub outcome: Outcome,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub seed: u64,
    /// Caps every `n` (and `d`) range; `None` runs the full ranges.
    pub max_n: Option<u32>,
}

impl Options {
    fn cap(&self, n: u32) -> u32 {
        self.max_n.map_or(n, |m| m.min(n))
    }
}

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "linear independence of L_1..L_{2^n}"),
    (2, "first-order structure modulo T^2"),
    (3, "output-size lower bound m* >= 2^n"),
    (4, "circuit sizes of F_n and R_n"),
    (5, "sparsity counts of F_n"),
    (6, "sequence bounds and sampling statistics"),
    (7, "elimination cross-oracle"),
    (8, "robustness dichotomy"),
    (9, "tangent rank over F_p"),
    (10, "formula growth"),
    (11, "VC suite"),
    (12, "oracle soundness"),
];

type Check = fn(&Options) -> Result<String, String>;

fn check_for(id: u32) -> Check {
    match id {
        1 => c1_independence,
        2 => c2_first_order,
        3 => c3_blowup,
        4 => c4_circuit_sizes,
        5 => c5_sparsity,
        6 => c6_sequences,
        7 => c7_elimination,
        8 => c8_robustness,
        9 => c9_tangent,
        10 => c10_formula,
        11 => c11_vc,
        12 => c12_oracles,
        _ => panic!("unknown criterion {id}"),
    }
}

pub fn run_one(id: u32, opts: &Options) -> Timed {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1.to_string())
        .unwrap_or_default();
    let start = Instant::now();
    let result = check_for(id)(opts);
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Timed {
        outcome: Outcome {
            id,
            title,
            passed,
            detail,
        },
        elapsed,
    }
}

pub fn run_all(opts: &Options) -> Vec<Timed> {
    CRITERIA.iter().map(|&(id, _)| run_one(id, opts)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let el = start.elapsed();
    ensure(el < limit, || format!("{what} took {el:?}, limit {limit:?}"))
}

fn c1_independence(o: &Options) -> Result<String, String> {
    let start = Instant::now();
    let mut ranks = Vec::new();
    for n in 1..=o.cap(10) {
        let field = if n <= 6 {
            RankField::Rationals
        } else {
            RankField::Prime { p: CERT_PRIME }
        };
        let c = independence_rank(n, field).map_err(|e| e.to_string())?;
        ensure(c.rank == 1 << n && c.witness_verified, || {
            format!("n = {n}: rank {} of {}", c.rank, 1 << n)
        })?;
        ranks.push(c.rank.to_string());
    }
    within(start, Duration::from_secs(120), "independence ranks")?;
    Ok(format!("ranks {} (Q for n <= 6, mod 2^62-57 above)", ranks.join(",")))
}

/// `P_n` expanded from its program and truncated modulo `T^2`.
fn truncated_expansion(n: u32) -> Result<MultiPoly, String> {
    let full = expand(&pn_slp(n), 0, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    Ok(full.truncate_in("T", 2))
}

fn c2_first_order(o: &Options) -> Result<String, String> {
    let mut printed_mismatch = Vec::new();
    for n in 1..=o.cap(4) {
        let actual = truncated_expansion(n)?;
        let signed = pn_first_order(n).map_err(|e| e.to_string())?;
        ensure(signed.truncated_poly() == actual, || format!("n = {n}: signed data differs"))?;
        let printed = pn_first_order_printed(n).map_err(|e| e.to_string())?.truncated_poly();
        let size = 1u32 << n;
        for k in 1..=size {
            let same = printed.coefficient_of("Y", size - k) == actual.coefficient_of("Y", size - k);
            ensure(same == (k % 2 == 0), || {
                format!("n = {n}, k = {k}: unsigned variant agreement {same}")
            })?;
        }
        printed_mismatch.push(n.to_string());
    }
    Ok(format!(
        "signed data exact for n = {}; unsigned variant fails exactly at odd k",
        printed_mismatch.join(",")
    ))
}

fn c3_blowup(o: &Options) -> Result<String, String> {
    let mut out = Vec::new();
    for n in 1..=o.cap(6) {
        let r = blowup_report(n, o.seed).map_err(|e| e.to_string())?;
        ensure(r.certified_lower_bound_m_star == Some(1 << n), || {
            format!("n = {n}: bound {:?}", r.certified_lower_bound_m_star)
        })?;
        ensure(r.certificates.iter().all(|c| c.is_full()), || format!("n = {n}: deficient"))?;
        out.push((1u64 << n).to_string());
    }
    Ok(format!("certified m* >= {}", out.join(",")))
}

fn c4_circuit_sizes(o: &Options) -> Result<String, String> {
    let top = o.cap(20);
    for n in 1..=top {
        let l = fn_slp(n).slp.profile().l_over_params;
        ensure(l == u64::from(n) - 1, || format!("F_{n}: L = {l}"))?;
        let ops = rn_slp(n).profile().total_ops;
        ensure(ops <= 12 * u64::from(n) + 8, || format!("R_{n}: {ops} ops"))?;
    }
    let worst = (1..=top)
        .map(|n| rn_slp(n).profile().total_ops as f64 / f64::from(n))
        .fold(0.0, f64::max);
    Ok(format!("L(F_n) = n-1 for n <= {top}; max ops(R_n)/n = {worst:.2}"))
}

fn c5_sparsity(o: &Options) -> Result<String, String> {
    for n in 1..=o.cap(10) {
        let xs: Vec<String> = (1..=n).map(|i| format!("X_{i}")).collect();
        let c = count_terms(&fn_closed_form(n), &Grouping::Restrict(xs));
        ensure(c == 1 << n, || format!("F_{n}: {c} X-monomials"))?;
    }
    for n in 1..=o.cap(8) {
        let c = count_terms(&fn_product_part(n), &Grouping::All);
        ensure(c == 3usize.pow(n), || format!("product part n = {n}: {c} terms"))?;
    }
    Ok("2^n X-monomials (n <= 10), 3^n product terms (n <= 8)".into())
}

fn c6_sequences(o: &Options) -> Result<String, String> {
    let start = Instant::now();
    for l in 1..=6 {
        for t in 1..=3 {
            let s = ClassSpec::new(l, t, 2);
            ensure(required_length(&s, Kind::CorrectTest) == 2 * l + 2, || "2L+2".into())?;
            ensure(required_length(&s, Kind::Identification) == 4 * l + 2, || "4L+2".into())?;
            let c = 4 * (l + t + 1) * (l + t + 1) + 2;
            ensure(required_length(&s, Kind::CircuitClass) == c, || "4(L+t+1)^2+2".into())?;
            ensure(
                required_set_size(&s, Kind::CircuitClass) == BigUint::from(1u32) << (4 * (l + 1)),
                || "2^(4(L+1))".into(),
            )?;
        }
    }
    let spot = ClassSpec::new(2, 1, 1);
    let (m, big_m) = (
        required_length(&spot, Kind::CircuitClass),
        required_set_size(&spot, Kind::CircuitClass),
    );
    ensure(m == 66 && big_m == BigUint::from(4096u32), || format!("spot value m = {m}, M = {big_m}"))?;

    let class = ClassEnum::linear("Y", -2, 2);
    let seeds = 500u64;
    let two = BigUint::from(2u32);
    let mut ok = 0u64;
    for k in 0..seeds {
        let gamma = sample_points(10, 1, &two, o.seed.wrapping_add(k));
        if is_identification_sequence(&gamma, &class).map_err(|e| e.to_string())?.holds {
            ok += 1;
        }
    }
    let frac = ok as f64 / seeds as f64;
    ensure(frac >= 0.45, || format!("identification fraction {frac:.3} < 0.45"))?;
    within(start, Duration::from_secs(30), "sequence statistics")?;
    Ok(format!("m = 66, #M = 4096 at (2,1); identification fraction {frac:.3} over {seeds} seeds"))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat_frac(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

fn c7_elimination(o: &Options) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 0xe11);
    let top = o.cap(10);
    for n in 1..=top {
        for _ in 0..20 {
            let t = random_rational(&mut rng);
            let u: Vec<Rational> = (0..n).map(|_| random_rational(&mut rng)).collect();
            let e = eliminate_hypercube(&fn_slp(n), &ElimMode::at(t.clone(), &u), ELIM_BUDGET)
                .map_err(|e| e.to_string())?
                .specialized()
                .expect("specialized mode");
            let p = pn_specialized(n, &t, &u).map_err(|e| e.to_string())?;
            ensure(e == p, || format!("n = {n}: mismatch at t = {t}"))?;
        }
    }
    let u = vec![rat(5), rat(7)];
    let p = eliminate_hypercube(&fn_slp(2), &ElimMode::at(rat(0), &u), ELIM_BUDGET)
        .map_err(|e| e.to_string())?
        .specialized()
        .expect("specialized mode");
    let expected = parse_poly("Y^4 - 6*Y^3 + 11*Y^2 - 6*Y").expect("valid");
    ensure(p == expected, || format!("n = 2, t = 0 gave {p}"))?;
    Ok(format!("20 random (t,u) agree for n = 1..{top}; n = 2, t = 0 gives {p}"))
}

fn c8_robustness(o: &Options) -> Result<String, String> {
    for d in 2..=o.cap(12).max(2) as u64 {
        let p = least_prime_congruent_one(d, 100);
        let r = robustness_probe(&Probe::Paradigm1 { d, p }).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("d = {d}, p = {p}: fiber size differs"))?;
    }
    for n in 1..=o.cap(8) {
        let r = robustness_probe(&Probe::Paradigm2 {
            n,
            samples: 20,
            seed: o.seed,
        })
        .map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("n = {n}: slice check failed"))?;
    }
    Ok("omega_d fibers have d points; t = 0 slice constant, t = 1 slice varies".into())
}

fn c9_tangent(o: &Options) -> Result<String, String> {
    let start = Instant::now();
    let top = o.cap(32) as u64;
    for d in 1..=top {
        let p = least_prime_congruent_one(d, 1 << 16);
        let c = tangent_rank_paradigm1(d, p).map_err(|e| e.to_string())?;
        ensure(c.rank == d as usize, || format!("d = {d}, p = {p}: rank {}", c.rank))?;
    }
    within(start, Duration::from_secs(10), "tangent ranks")?;
    Ok(format!("rank d for d = 1..{top} (finite-field transport)"))
}

fn c10_formula(o: &Options) -> Result<String, String> {
    for n in 2..=20u32 {
        ensure(phi_constraints(n) == 4 * n as usize + 10, || format!("m({n})"))?;
        let bound = 3 * i64::from(n).pow(3);
        let g = sample_gamma(n, phi_constraints(n), o.seed);
        ensure(g.iter().flatten().all(|v| v.abs() <= bound), || format!("gamma_{n} out of range"))?;
    }
    let mut worst: f64 = 0.0;
    for variant in [PhiVariant::Circuit, PhiVariant::Sparse] {
        for n in 4..=o.cap(10).max(4) {
            let a = phi_formula(n, variant, o.seed).map_err(|e| e.to_string())?.length;
            let b = phi_formula(2 * n, variant, o.seed).map_err(|e| e.to_string())?.length;
            let ratio = b as f64 / a as f64;
            worst = worst.max(ratio);
            ensure(ratio <= 4.5, || format!("{variant:?} n = {n}: ratio {ratio:.3}"))?;
        }
    }
    Ok(format!("m(n) = 4n+10, |gamma| <= 3n^3, max |Phi_2n|/|Phi_n| = {worst:.3}"))
}

fn c11_vc(_: &Options) -> Result<String, String> {
    let class = ClassEnum::linear("Y", -1, 1);
    let pool: Vec<Vec<Rational>> = [-1, 0, 1, 2].iter().map(|&x| vec![rat(x)]).collect();
    let r = vc_shatter_oracle(&class.members, &["Y"], &pool, 3, SHATTER_BUDGET)
        .map_err(|e| e.to_string())?;
    let upper = vc_upper(2, 1, VcVariant::Complex).map_err(|e| e.to_string())?.max_dim;
    ensure(r.dim == 2 && r.dim as u64 <= upper, || format!("shatter {} vs upper {upper}", r.dim))?;
    let w = wlt_vc_sandwich(4, 1, &rat(1)).map_err(|e| e.to_string())?;
    ensure(w.lower == rat(3) && w.upper == rat(10368), || {
        format!("sandwich ({}, {})", w.lower, w.upper)
    })?;
    Ok(format!("shatter dim 2 <= {upper}; sandwich (3, 10368)"))
}

/// A random program with `params` parameters and `vars` variables whose
/// only divisions are by nonzero constants.
pub fn random_slp(rng: &mut ChaCha8Rng, params: usize, vars: usize, ops: usize) -> Slp {
    let pn: Vec<String> = (0..params).map(|i| format!("A_{i}")).collect();
    let vn: Vec<String> = (0..vars).map(|i| format!("X_{i}")).collect();
    let mut b = SlpBuilder::new(&pn, &vn);
    let mut nodes: Vec<usize> = (0..params).map(|i| b.param(i)).chain((0..vars).map(|i| b.var(i))).collect();
    for _ in 0..ops {
        let x = nodes[rng.gen_range(0..nodes.len())];
        let y = nodes[rng.gen_range(0..nodes.len())];
        let node = match rng.gen_range(0..6) {
            0 => b.add(x, y),
            1 => b.sub(x, y),
            2 | 3 => b.mul(x, y),
            4 => {
                let c = b.constant(rat_frac(rng.gen_range(-5..=5), rng.gen_range(1..=3)));
                b.add(x, c)
            }
            _ => {
                let mut v = rng.gen_range(-3..=3);
                if v == 0 {
                    v = 2;
                }
                let c = b.constant(rat(v));
                b.div(x, c)
            }
        };
        nodes.push(node);
    }
    let out = *nodes.last().expect("nonempty");
    b.output(out, None);
    b.finish()
}

fn c12_oracles(o: &Options) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 0x0c12);
    let mut points_checked = 0usize;
    for k in 0..500 {
        let params = rng.gen_range(0..=2);
        let vars = rng.gen_range(1..=3);
        let ops = rng.gen_range(1..=10);
        let slp = random_slp(&mut rng, params, vars, ops);
        let poly = expand(&slp, 0, DEFAULT_BUDGET).map_err(|e| format!("program {k}: {e}"))?;
        for _ in 0..20 {
            let pv: Vec<Rational> = (0..params).map(|_| random_rational(&mut rng)).collect();
            let xv: Vec<Rational> = (0..vars).map(|_| random_rational(&mut rng)).collect();
            let direct = slp.evaluate(&Rationals, &pv, &xv).map_err(|e| e.to_string())?;
            let all: Vec<Rational> = pv.iter().chain(&xv).cloned().collect();
            let via = poly.eval_rational(&all).map_err(|e| e.to_string())?;
            ensure(direct[0] == via, || format!("program {k}: evaluate {} vs expand {via}", direct[0]))?;
            points_checked += 1;
        }
    }
    let vars = ["Y_1", "Y_2"];
    let monomials: Vec<Exponents> = (0..=3u32)
        .flat_map(|a| (0..=3 - a).map(move |b| vec![a, b]))
        .collect();
    for k in 0..200u64 {
        let size = rng.gen_range(1..=monomials.len());
        let mut basis = monomials.clone();
        for i in 0..size {
            let j = rng.gen_range(i..basis.len());
            basis.swap(i, j);
        }
        basis.truncate(size);
        let p = MultiPoly::from_terms(
            &vars,
            basis.iter().map(|e| (e.clone(), random_rational(&mut rng))),
        );
        let gamma = sample_points(2 * size + 2, 2, &BigUint::from(1_000_000u32), o.seed.wrapping_add(k));
        let code = encode_poly(&p, &gamma).map_err(|e| e.to_string())?;
        let back = decode(&code, &gamma, &vars, &basis).map_err(|e| format!("roundtrip {k}: {e}"))?;
        ensure(back == p, || format!("roundtrip {k}: {p} decoded as {back}"))?;
    }
    Ok(format!("{points_checked} evaluate/expand comparisons, 200 roundtrips, no mismatch"))
}
