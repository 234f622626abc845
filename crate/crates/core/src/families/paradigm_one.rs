//! `F_d(U, Y) = sum_{j=0}^{d} (U^d - 1) U^j Y^j` and its coefficient map.

use num_traits::One;

use crate::poly::MultiPoly;
use crate::ring::{Field, Rational};
use crate::slp::{Slp, SlpBuilder};

/// A program for `F_d` with parameter `U` and variable `Y`.
///
/// When `d + 1` is a power of two the geometric sum in `W = U Y` is written
/// as `prod_k (1 + W^(2^k))`, costing `O(log d)` essential multiplications;
/// otherwise a Horner scheme in `W` is used.
pub fn fd_slp(d: u64) -> Slp {
    assert!(d >= 1, "d must be positive");
    let mut b = SlpBuilder::new(&["U"], &["Y"]);
    let (u, y) = (b.param(0), b.var(0));
    let one = b.constant(Rational::one());
    let w = b.mul(u, y);
    let sum = if (d + 1).is_power_of_two() {
        let r = (d + 1).trailing_zeros();
        let mut power = w;
        let mut acc = b.add(one, w);
        for _ in 1..r {
            power = b.mul(power, power);
            let factor = b.add(one, power);
            acc = b.mul(acc, factor);
        }
        acc
    } else {
        let mut acc = b.add(w, one);
        for _ in 1..d {
            let t = b.mul(acc, w);
            acc = b.add(t, one);
        }
        acc
    };
    let ud = b.pow(u, d);
    let lead = b.sub(ud, one);
    let out = b.mul(lead, sum);
    b.output(out, None);
    b.finish()
}

/// `F_d` expanded, over the variables `[U, Y]`.
pub fn fd_closed_form(d: u64) -> MultiPoly {
    let mut terms = Vec::with_capacity(2 * (d as usize + 1));
    for j in 0..=d as u32 {
        terms.push((vec![d as u32 + j, j], Rational::one()));
        terms.push((vec![j, j], -Rational::one()));
    }
    MultiPoly::from_terms(&["U", "Y"], terms)
}

/// Coefficient vector `((u^d - 1), (u^d - 1) u, ..., (u^d - 1) u^d)`.
pub fn omega_d<F: Field>(field: &F, d: u64, u: &F::Elem) -> Vec<F::Elem> {
    let lead = field.sub(&field.pow(u, d), &field.one());
    let mut out = Vec::with_capacity(d as usize + 1);
    let mut cur = lead;
    for _ in 0..=d {
        out.push(cur.clone());
        cur = field.mul(&cur, u);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{expand, parse_poly_in, DEFAULT_BUDGET};
    use crate::ring::{rat, Fp64, Rationals};

    #[test]
    fn expansion_matches_closed_form() {
        for d in 1..=15 {
            let slp = fd_slp(d);
            assert_eq!(expand(&slp, 0, DEFAULT_BUDGET).unwrap(), fd_closed_form(d), "d = {d}");
        }
    }

    #[test]
    fn product_form_is_logarithmic() {
        for r in 1..8u32 {
            let d = (1u64 << (r + 1)) - 1;
            let p = fd_slp(d).profile();
            assert!(p.l_over_scalars <= 4 * (r as u64 + 1), "d = {d}: {p:?}");
        }
    }

    #[test]
    fn worked_values() {
        let f3 = fd_closed_form(3).specialize(&[("U", rat(2))]);
        assert_eq!(f3, parse_poly_in("7*(1 + 2*Y + 4*Y^2 + 8*Y^3)", &["Y"]).unwrap());
        let f1 = fd_closed_form(1).specialize(&[("U", rat(1))]);
        assert!(f1.is_zero());
        assert!(!fd_closed_form(3).specialize(&[("U", rat(-1))]).is_zero());
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_d(&Rationals, 2, &rat(2)), vec![rat(3), rat(6), rat(12)]);
        assert_eq!(omega_d(&Rationals, 2, &rat(0)), vec![rat(-1), rat(0), rat(0)]);
        let f5 = Fp64::new(5).unwrap();
        assert_eq!(omega_d(&f5, 4, &2), vec![0; 5]);
    }

    #[test]
    fn omega_fiber_is_roots_of_unity() {
        for (p, d) in [(13u64, 3u64), (13, 4), (13, 6), (31, 5), (101, 10)] {
            let f = Fp64::new(p).unwrap();
            let fiber = (0..p)
                .filter(|u| omega_d(&f, d, u).iter().all(|&x| x == 0))
                .count();
            assert_eq!(fiber as u64, d);
        }
    }
}
