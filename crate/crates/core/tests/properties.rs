//! Cross-module properties on randomized inputs.

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use elimkit::bounds::wlt_vc_sandwich;
use elimkit::encoding::{decode, encode_poly, injectivity_check};
use elimkit::families::{fn_slp, pn_roots};
use elimkit::harness::{eliminate_hypercube, separability_check, ElimMode, ELIM_BUDGET};
use elimkit::poly::{expand, squarefree_part, uni_gcd, MultiPoly, DEFAULT_BUDGET};
use elimkit::reproduce::random_slp;
use elimkit::ring::{rat, rat_frac, Rational, Rationals};
use elimkit::sequences::{
    degree_bounds, is_identification_sequence, pit, required_length, required_set_size, sample_points, ClassEnum,
    ClassSpec, Kind, PitVerdict,
};
use elimkit::slp::{parse_slp, serialize_slp, SlpBuilder};

fn arb_rat() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat_frac(n, d))
}

/// Random polynomial in `Y_1, Y_2` of degree at most 3.
fn arb_poly() -> impl Strategy<Value = MultiPoly> {
    proptest::collection::vec(arb_rat(), 10).prop_map(|cs| {
        let exps = (0..=3u32).flat_map(|a| (0..=3 - a).map(move |b| vec![a, b]));
        MultiPoly::from_terms(&["Y_1", "Y_2"], exps.zip(cs))
    })
}

fn full_basis() -> Vec<Vec<u32>> {
    (0..=3u32).flat_map(|a| (0..=3 - a).map(move |b| vec![a, b])).collect()
}

fn gamma(seed: u64) -> elimkit::sequences::TestSequence {
    sample_points(14, 2, &BigUint::from(10_000u32), seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_parse_roundtrip(seed in any::<u64>(), ops in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slp = random_slp(&mut rng, 2, 3, ops);
        prop_assert_eq!(parse_slp(&serialize_slp(&slp)).unwrap(), slp);
    }

    #[test]
    fn degree_bounds_dominate(seed in any::<u64>(), ops in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slp = random_slp(&mut rng, 1, 2, ops);
        let p = expand(&slp, 0, DEFAULT_BUDGET).unwrap();
        let is_var: Vec<bool> = p.vars().iter().map(|v| slp.vars().contains(v)).collect();
        let deg = p
            .terms()
            .map(|(e, _)| e.iter().zip(&is_var).filter(|(_, &v)| v).map(|(&x, _)| u64::from(x)).sum::<u64>())
            .max()
            .unwrap_or(0);
        prop_assert!(slp.profile().var_degree_bound[0] >= deg);
    }

    #[test]
    fn pit_never_flags_zero(seed in any::<u64>(), ops in 1usize..10, gseed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = random_slp(&mut rng, 0, 2, ops);
        // Rebuild the program with its output subtracted from itself.
        let mut text = serialize_slp(&inner);
        let last = text.lines().rev().find(|l| l.starts_with("output")).unwrap().to_string();
        let node = last.split_whitespace().nth(1).unwrap().to_string();
        text = text.replace(&last, &format!("zz = sub {node} {node}\noutput zz"));
        let slp = parse_slp(&text).unwrap();
        let g = sample_points(5, 2, &BigUint::from(50u32), gseed);
        prop_assert_eq!(pit(&slp, 0, &[], &g).unwrap(), PitVerdict::Zero);
    }

    #[test]
    fn encoding_is_linear(f in arb_poly(), g in arb_poly(), a in arb_rat(), b in arb_rat(), seed in any::<u64>()) {
        let gm = gamma(seed);
        let combo = &f.scale(&a) + &g.scale(&b);
        let (ef, eg, ec) = (encode_poly(&f, &gm).unwrap(), encode_poly(&g, &gm).unwrap(), encode_poly(&combo, &gm).unwrap());
        for i in 0..gm.points.len() {
            prop_assert_eq!(&ec.values[i], &(&a * &ef.values[i] + &b * &eg.values[i]));
        }
        let scaled = encode_poly(&f.scale(&a), &gm).unwrap();
        for i in 0..gm.points.len() {
            prop_assert_eq!(&scaled.values[i], &(&a * &ef.values[i]));
        }
    }

    #[test]
    fn decode_inverts_encode(f in arb_poly(), seed in any::<u64>()) {
        let gm = gamma(seed);
        let code = encode_poly(&f, &gm).unwrap();
        let back = decode(&code, &gm, &["Y_1", "Y_2"], &full_basis()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(encode_poly(&back, &gm).unwrap(), code);
    }

    #[test]
    fn injectivity_matches_identification(m in 1usize..4, size in 2u32..5, seed in any::<u64>(), lo in -2i64..0, hi in 0i64..2) {
        let class = ClassEnum::linear("Y", lo, hi);
        let g = sample_points(m, 1, &BigUint::from(size), seed);
        let ident = is_identification_sequence(&g, &class).unwrap().holds;
        prop_assert_eq!(injectivity_check(&g, &class).unwrap(), ident);
    }

    #[test]
    fn fn_on_hypercube(n in 1u32..=10, t in arb_rat(), us in proptest::collection::vec(arb_rat(), 10), mask in any::<u32>()) {
        let u = &us[..n as usize];
        let eps: Vec<Rational> = (0..n).map(|i| rat(i64::from((mask >> i) & 1))).collect();
        let mut params = vec![t.clone()];
        params.extend(u.iter().cloned());
        let got = fn_slp(n).slp.evaluate(&Rationals, &params, &eps).unwrap();
        let j = i64::from(mask & ((1 << n) - 1));
        let mut prod = t;
        for i in 0..n as usize {
            if (mask >> i) & 1 == 1 {
                prod *= &u[i];
            }
        }
        prop_assert_eq!(&got[0], &(rat(j) + prod));
    }

    #[test]
    fn distinct_roots_give_separable_elimination(n in 1u32..=6, t in arb_rat(), us in proptest::collection::vec(arb_rat(), 6)) {
        prop_assume!(t != rat(0));
        let u = &us[..n as usize];
        let mut roots = pn_roots(n, &t, u);
        roots.sort();
        roots.dedup();
        prop_assume!(roots.len() == 1 << n);
        let p = eliminate_hypercube(&fn_slp(n), &ElimMode::at(t, u), ELIM_BUDGET).unwrap().specialized().unwrap();
        prop_assert!(separability_check(&p).unwrap().separable);
    }

    #[test]
    fn squarefree_part_is_squarefree(roots in proptest::collection::vec((-4i64..=4, 1u32..=3), 1..5)) {
        let mut p = MultiPoly::constant(&["Y"], rat(1));
        for (r, mult) in &roots {
            let f = &MultiPoly::var("Y") - &MultiPoly::constant(&["Y"], rat(*r));
            p = &p * &f.pow(i64::from(*mult)).unwrap();
        }
        let s = squarefree_part(&p).unwrap();
        prop_assert!(uni_gcd(&s, &s.derivative("Y")).unwrap().as_constant().is_some());
        let mut distinct: Vec<i64> = roots.iter().map(|r| r.0).collect();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(s.degree_in("Y") as usize, distinct.len());
        for r in distinct {
            prop_assert_eq!(s.eval_rational(&[rat(r)]).unwrap(), rat(0));
        }
    }
}

#[test]
fn sequence_parameters_are_monotone() {
    for kind in [Kind::CorrectTest, Kind::Identification, Kind::CircuitClass] {
        for l in 1..=6u64 {
            for t in 1..=3u64 {
                for delta in 1..=3u64 {
                    let base = ClassSpec::new(l, t, delta);
                    let longer = ClassSpec::new(l + 1, t, delta);
                    assert!(required_length(&longer, kind) >= required_length(&base, kind));
                    for bigger in [ClassSpec::new(l, t + 1, delta), ClassSpec::new(l, t, delta + 1)] {
                        assert!(required_length(&bigger, kind) >= required_length(&base, kind));
                        assert!(required_set_size(&bigger, kind) >= required_set_size(&base, kind));
                    }
                    // Δ^2 (deg O)^(1/L) shrinks as L grows, so only the
                    // circuit-class set size is monotone in L.
                    if kind == Kind::CircuitClass {
                        assert!(required_set_size(&longer, kind) >= required_set_size(&base, kind));
                    }
                }
            }
        }
    }
    let identification = |l| required_set_size(&ClassSpec::new(l, 1, 2), Kind::Identification);
    assert!(identification(2) < identification(1));
    for l in 1..=5u64 {
        for k in 0..=3u64 {
            for d1 in 1..=3u64 {
                for d2 in 1..=3u64 {
                    let spec = |l, k, d1, d2| ClassSpec { k, delta1: d1, delta2: d2, ..ClassSpec::new(l, 1, 1) };
                    for equi in [false, true] {
                        let base = degree_bounds(&spec(l, k, d1, d2), equi);
                        for bigger in [spec(l + 1, k, d1, d2), spec(l, k + 1, d1, d2), spec(l, k, d1 + 1, d2), spec(l, k, d1, d2 + 1)] {
                            let b = degree_bounds(&bigger, equi);
                            assert!(b.deg_d_bound >= base.deg_d_bound && b.deg_o_bound >= base.deg_o_bound);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn wlt_sandwich_is_proper() {
    for l in 2..=16 {
        for t in 1..=4 {
            let w = wlt_vc_sandwich(l, t, &rat(1)).unwrap();
            assert!(w.lower < w.upper, "L = {l}, t = {t}");
        }
    }
}

#[test]
fn builder_programs_match_text() {
    let mut b = SlpBuilder::new(&["A"], &["X"]);
    let x = b.var(0);
    let a = b.param(0);
    let m = b.mul(a, x);
    b.output(m, None);
    let slp = b.finish();
    assert_eq!(parse_slp(&serialize_slp(&slp)).unwrap(), slp);
}
