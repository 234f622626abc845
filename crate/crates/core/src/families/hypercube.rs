//! The hypercube family
//! `F_n = sum_i 2^{i-1} X_i + T prod_i (1 + (U_i - 1) X_i)`
//! with equations `X_i^2 - X_i = 0`, its sparse chain reformulation, and
//! the cone `R_n = Z F_n`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{indexed, FamilyError};
use crate::poly::{parse_poly_in, MultiPoly, PolyError};
use crate::ring::Rational;
use crate::slp::{Slp, SlpBuilder};

/// A polynomial over parameters and `n` variables whose fibers are the
/// points of `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypercubeFamily {
    pub n: u32,
    pub slp: Slp,
    /// Whether `slp` is the generator [`fn_slp`], whose elimination
    /// polynomial has known first-order structure.
    pub structured: bool,
}

impl HypercubeFamily {
    /// Wraps an arbitrary single-output program in `n` variables.
    pub fn custom(slp: Slp) -> Result<Self, FamilyError> {
        if slp.outputs().len() != 1 {
            return Err(FamilyError::InvalidArgument(
                "hypercube family needs exactly one output".into(),
            ));
        }
        let n = slp.vars().len() as u32;
        if n == 0 {
            return Err(FamilyError::InvalidArgument(
                "hypercube family needs at least one variable".into(),
            ));
        }
        Ok(Self {
            n,
            slp,
            structured: false,
        })
    }
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shared builder for `F_n` and `R_n`; the first parameter `Z`, when
/// present, multiplies the result.
fn build(n: u32, with_z: bool) -> Slp {
    assert!(n >= 1);
    let n = n as usize;
    let mut params = Vec::new();
    if with_z {
        params.push("Z".to_string());
    }
    params.push("T".to_string());
    params.extend(indexed("U", n));
    let vars = indexed("X", n);
    let mut b = SlpBuilder::new(&params, &vars);
    let off = usize::from(with_z);
    let t = b.param(off);
    let one = b.constant(Rational::one());

    let mut linear = b.var(0);
    for i in 1..n {
        let c = b.constant(int(1 << i));
        let term = b.mul(c, b.var(i));
        linear = b.add(linear, term);
    }

    let mut product: Option<usize> = None;
    for i in 0..n {
        let shifted = b.sub(b.param(off + 1 + i), one);
        let scaled = b.mul(shifted, b.var(i));
        let factor = b.add(one, scaled);
        product = Some(match product {
            None => factor,
            Some(p) => b.mul(p, factor),
        });
    }
    let tp = b.mul(t, product.expect("n >= 1"));
    let mut out = b.add(linear, tp);
    if with_z {
        out = b.mul(b.param(0), out);
    }
    b.output(out, None);
    b.finish()
}

/// `F_n` with parameters `T, U_1..U_n` and variables `X_1..X_n`. The only
/// essential multiplications are the `n - 1` chaining the factors.
pub fn fn_slp(n: u32) -> HypercubeFamily {
    HypercubeFamily {
        n,
        slp: build(n, false),
        structured: true,
    }
}

/// `R_n = Z F_n` with parameters `Z, T, U_1..U_n`.
pub fn rn_slp(n: u32) -> Slp {
    build(n, true)
}

fn param_and_var_names(n: u32, with_z: bool) -> Vec<String> {
    let mut names = Vec::new();
    if with_z {
        names.push("Z".to_string());
    }
    names.push("T".to_string());
    names.extend(indexed("U", n as usize));
    names.extend(indexed("X", n as usize));
    names
}

/// `T prod_i (1 + (U_i - 1) X_i)` expanded.
pub fn fn_product_part(n: u32) -> MultiPoly {
    let names = param_and_var_names(n, false);
    let mut acc = MultiPoly::var("T").with_vars(&names).expect("T is listed");
    for i in 1..=n {
        let factor = parse_poly_in(&format!("1 + (U_{i} - 1)*X_{i}"), &names).expect("well-formed");
        acc = &acc * &factor;
    }
    acc
}

fn linear_part(n: u32, names: &[String]) -> MultiPoly {
    let offset = names.len() - n as usize;
    MultiPoly::from_terms(
        names,
        (0..n as usize).map(|i| {
            let mut e = vec![0; names.len()];
            e[offset + i] = 1;
            (e, int(1 << i))
        }),
    )
}

/// `F_n` expanded over `[T, U_1..U_n, X_1..X_n]`.
pub fn fn_closed_form(n: u32) -> MultiPoly {
    let names = param_and_var_names(n, false);
    &linear_part(n, &names) + &fn_product_part(n)
}

/// `R_n` expanded over `[Z, T, U_1..U_n, X_1..X_n]`.
pub fn rn_closed_form(n: u32) -> MultiPoly {
    let names = param_and_var_names(n, true);
    let z = MultiPoly::var("Z").with_vars(&names).expect("Z is listed");
    let f = fn_closed_form(n).with_vars(&names).expect("superset");
    &z * &f
}

/// The sparse system `G~_1..G~_{3n-1}` and `F~ = X_{2n-1} + T X_{3n-1}`
/// over `[T, U_1..U_n, X_1..X_{3n-1}]`.
#[derive(Debug, Clone)]
pub struct GTildeSystem {
    pub n: u32,
    pub vars: Vec<String>,
    pub equations: Vec<MultiPoly>,
    pub f_tilde: MultiPoly,
}

/// Text of the equations `G~_1..G~_{3n-1}` in the variables `X_1..X_{3n-1}`
/// and `U_1..U_n`, with `x(k)` naming `X_k`.
pub(crate) fn gtilde_equations_text(n: usize, x: impl Fn(usize) -> String) -> Vec<String> {
    let mut eqs = Vec::with_capacity(3 * n - 1);
    for i in 1..=n {
        eqs.push(format!("{0}^2 - {0}", x(i)));
    }
    eqs.extend(gtilde_chain_text(n, &x, false));
    eqs
}

/// The chain part `G~_{n+1}..G~_{3n-1}`. With `power_notation` the
/// coefficients `2^e` are written as powers rather than expanded.
pub(crate) fn gtilde_chain_text(
    n: usize,
    x: impl Fn(usize) -> String,
    power_notation: bool,
) -> Vec<String> {
    let coeff = |e: usize| {
        if power_notation {
            format!("2^{e}")
        } else {
            (1u128 << e).to_string()
        }
    };
    let mut eqs = Vec::with_capacity(2 * n - 1);
    eqs.push(format!("{} - 2*{} - {}", x(n + 1), x(2), x(1)));
    for j in n + 2..=2 * n - 1 {
        eqs.push(format!(
            "{} - {} - {}*{}",
            x(j),
            x(j - 1),
            coeff(j - n),
            x(j - n + 1)
        ));
    }
    eqs.push(format!("{} - U_1*{} + {} - 1", x(2 * n), x(1), x(1)));
    for k in 2 * n + 1..=3 * n - 1 {
        let i = k - 2 * n + 1;
        eqs.push(format!(
            "{xk} - U_{i}*{xp}*{xi} + {xp}*{xi} - {xp}",
            xk = x(k),
            xp = x(k - 1),
            xi = x(i)
        ));
    }
    eqs
}

pub fn gtilde_system(n: u32) -> Result<GTildeSystem, FamilyError> {
    if n < 2 {
        return Err(FamilyError::InvalidArgument(
            "the sparse system needs n >= 2".into(),
        ));
    }
    let nn = n as usize;
    let mut vars = vec!["T".to_string()];
    vars.extend(indexed("U", nn));
    vars.extend(indexed("X", 3 * nn - 1));
    let parse = |s: &str| -> Result<MultiPoly, PolyError> { parse_poly_in(s, &vars) };
    let equations = gtilde_equations_text(nn, |k| format!("X_{k}"))
        .iter()
        .map(|s| parse(s))
        .collect::<Result<Vec<_>, _>>()
        .expect("generated text parses");
    let f_tilde = parse(&format!("X_{} + T*X_{}", 2 * nn - 1, 3 * nn - 1)).expect("parses");
    Ok(GTildeSystem {
        n,
        vars,
        equations,
        f_tilde,
    })
}

impl GTildeSystem {
    /// Solves the chain for the auxiliary variables at a hypercube point,
    /// checks every equation vanishes, and returns `(X_1..X_{3n-1}, F~)`.
    pub fn solve_chain(
        &self,
        t: &Rational,
        u: &[Rational],
        x: &[Rational],
    ) -> Result<(Vec<Rational>, Rational), FamilyError> {
        let n = self.n as usize;
        if u.len() != n || x.len() != n {
            return Err(FamilyError::InvalidArgument(format!(
                "expected {n} values for U and X"
            )));
        }
        let mut xs: Vec<Rational> = x.to_vec();
        // X_{n+1} = X_1 + 2 X_2, X_j = X_{j-1} + 2^{j-n} X_{j-n+1}
        xs.push(&xs[0] + int(2) * &xs[1]);
        for j in n + 2..=2 * n - 1 {
            let v = &xs[j - 2] + int(1 << (j - n)) * &xs[j - n];
            xs.push(v);
        }
        // X_{2n} = 1 + (U_1 - 1) X_1, X_k = X_{k-1} (1 + (U_i - 1) X_i)
        let one = Rational::one();
        xs.push(&one + (&u[0] - &one) * &xs[0]);
        for k in 2 * n + 1..=3 * n - 1 {
            let i = k - 2 * n + 1;
            let v = &xs[k - 2] * (&one + (&u[i - 1] - &one) * &xs[i - 1]);
            xs.push(v);
        }
        let mut point = vec![t.clone()];
        point.extend(u.iter().cloned());
        point.extend(xs.iter().cloned());
        for (idx, eq) in self.equations.iter().enumerate() {
            let v = eq.eval_rational(&point).expect("arity matches");
            if !v.is_zero() {
                return Err(FamilyError::InvalidArgument(format!(
                    "equation {} does not vanish (value {v}); X must lie on the hypercube",
                    idx + 1
                )));
            }
        }
        let value = self.f_tilde.eval_rational(&point).expect("arity matches");
        Ok((xs, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{count_terms, expand, Grouping, DEFAULT_BUDGET};
    use crate::ring::{rat, Rationals};

    fn eval_fn(n: u32, t: i64, u: &[i64], x: &[i64]) -> Rational {
        let mut params = vec![rat(t)];
        params.extend(u.iter().map(|&v| rat(v)));
        let xs: Vec<Rational> = x.iter().map(|&v| rat(v)).collect();
        fn_slp(n).slp.evaluate(&Rationals, &params, &xs).unwrap()[0].clone()
    }

    #[test]
    fn worked_values() {
        assert_eq!(eval_fn(2, 0, &[5, 7], &[1, 1]), rat(3));
        assert_eq!(eval_fn(3, 1, &[1, 1, 1], &[1, 0, 1]), rat(6));
        assert_eq!(fn_slp(5).slp.profile().l_over_params, 4);
    }

    #[test]
    fn essential_size_is_n_minus_one() {
        for n in 1..=20 {
            assert_eq!(fn_slp(n).slp.profile().l_over_params, n as u64 - 1);
        }
    }

    #[test]
    fn expansion_matches_closed_form() {
        for n in 1..=6 {
            let e = expand(&fn_slp(n).slp, 0, DEFAULT_BUDGET).unwrap();
            assert_eq!(e, fn_closed_form(n), "F_{n}");
            let r = expand(&rn_slp(n), 0, DEFAULT_BUDGET).unwrap();
            assert_eq!(r, rn_closed_form(n), "R_{n}");
        }
    }

    #[test]
    fn f2_grouped_by_x() {
        let f = fn_closed_form(2);
        let xs = Grouping::Restrict(vec!["X_1".into(), "X_2".into()]);
        assert_eq!(count_terms(&f, &xs), 4);
        let names = ["T", "U_1", "U_2", "X_1", "X_2"];
        let x1 = f.coefficient_of("X_1", 1).coefficient_of("X_2", 0);
        assert_eq!(x1, parse_poly_in("1 + T*(U_1 - 1)", &names).unwrap());
        let x12 = f.coefficient_of("X_1", 1).coefficient_of("X_2", 1);
        assert_eq!(x12, parse_poly_in("T*(U_1 - 1)*(U_2 - 1)", &names).unwrap());
        assert_eq!(count_terms(&fn_product_part(2), &Grouping::All), 9);
    }

    #[test]
    fn hypercube_values() {
        let n = 4;
        let u = [2i64, -3, 5, 7];
        for j in 0..16usize {
            let x: Vec<i64> = (0..n).map(|i| ((j >> i) & 1) as i64).collect();
            let mono: i64 = (0..n).filter(|&i| x[i] == 1).map(|i| u[i]).product();
            assert_eq!(eval_fn(n as u32, 3, &u, &x), rat(j as i64 + 3 * mono));
        }
    }

    #[test]
    fn rn_values_and_size() {
        let slp = rn_slp(3);
        let ev = |z: i64, t: i64, x: [i64; 3]| {
            slp.evaluate(&Rationals, &[rat(z), rat(t), rat(4), rat(5), rat(6)], &x.map(rat))
                .unwrap()[0]
                .clone()
        };
        assert_eq!(ev(0, 9, [1, 1, 0]), rat(0));
        assert_eq!(ev(1, 2, [1, 0, 1]), eval_fn(3, 2, &[4, 5, 6], &[1, 0, 1]));
        for i in 0..3 {
            let mut x = [0; 3];
            x[i] = 1;
            assert_eq!(ev(2, 0, x), rat(2 << i));
        }
        for n in 1..=30 {
            assert!(rn_slp(n).profile().total_ops <= 12 * n as u64 + 8);
        }
    }

    #[test]
    fn gtilde_shape_and_chain() {
        let g = gtilde_system(2).unwrap();
        assert_eq!(g.equations.len(), 5);
        let names = &g.vars;
        assert_eq!(g.equations[2], parse_poly_in("X_3 - 2*X_2 - X_1", names).unwrap());
        assert_eq!(g.equations[2].num_terms(), 3);
        let (_, v) = g.solve_chain(&rat(1), &[rat(1), rat(1)], &[rat(1), rat(0)]).unwrap();
        assert_eq!(v, rat(2));
        for n in 2..=8 {
            let g = gtilde_system(n).unwrap();
            assert_eq!(g.equations.len(), 3 * n as usize - 1);
            assert!(g.equations.iter().all(|e| e.num_terms() <= 4));
        }
        assert!(gtilde_system(1).is_err());
    }

    #[test]
    fn gtilde_reproduces_fn_on_hypercube() {
        for n in 2..=5u32 {
            let g = gtilde_system(n).unwrap();
            let u: Vec<i64> = (0..n as i64).map(|i| 2 * i - 3).collect();
            for j in 0..(1usize << n) {
                let x: Vec<i64> = (0..n).map(|i| ((j >> i) & 1) as i64).collect();
                let (_, v) = g
                    .solve_chain(
                        &rat(-2),
                        &u.iter().map(|&a| rat(a)).collect::<Vec<_>>(),
                        &x.iter().map(|&a| rat(a)).collect::<Vec<_>>(),
                    )
                    .unwrap();
                assert_eq!(v, eval_fn(n, -2, &u, &x));
            }
        }
    }

    #[test]
    fn custom_family_requires_one_output() {
        let slp = crate::slp::parse_slp("slp v1\nvar X_1\noutput X_1\n").unwrap();
        let fam = HypercubeFamily::custom(slp).unwrap();
        assert_eq!(fam.n, 1);
        assert!(!fam.structured);
        let _ = BigInt::zero();
    }
}
