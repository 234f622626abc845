//! Symbolic expansion of a program output into a [`MultiPoly`].

use thiserror::Error;

use super::MultiPoly;
use crate::ring::Rational;
use crate::slp::{Node, Slp, Violation};

/// Default cap on the number of terms of any intermediate polynomial.
pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("expansion too large: {terms} terms exceed the budget of {budget}")]
    TooLarge { terms: usize, budget: usize },
    #[error("unsupported division at node {node}: divisor is not a constant")]
    UnsupportedDivision { node: usize },
    #[error("division by zero at node {node}")]
    DivisionByZero { node: usize },
    #[error("no output with index {0}")]
    NoSuchOutput(usize),
    #[error("invalid program: {0}")]
    Invalid(Violation),
}

/// Expands output `output` of `slp` over the variables params ++ vars.
///
/// Only nodes reachable from the output are expanded. Division is accepted
/// when the divisor expands to a nonzero constant.
pub fn expand(slp: &Slp, output: usize, budget: usize) -> Result<MultiPoly, ExpandError> {
    slp.validate().map_err(ExpandError::Invalid)?;
    let root = slp
        .outputs()
        .get(output)
        .ok_or(ExpandError::NoSuchOutput(output))?
        .node;
    let names: Vec<String> = slp.params().iter().chain(slp.vars()).cloned().collect();
    let n_params = slp.params().len();
    let nodes = slp.nodes();

    let mut needed = vec![false; nodes.len()];
    needed[root] = true;
    for i in (0..=root).rev() {
        if needed[i] {
            if let Some((a, b)) = nodes[i].operands() {
                needed[a] = true;
                needed[b] = true;
            }
        }
    }

    let check = |p: &MultiPoly| {
        if p.num_terms() > budget {
            Err(ExpandError::TooLarge {
                terms: p.num_terms(),
                budget,
            })
        } else {
            Ok(())
        }
    };

    let mut values: Vec<Option<MultiPoly>> = vec![None; nodes.len()];
    for i in 0..=root {
        if !needed[i] {
            continue;
        }
        let get = |k: usize| values[k].as_ref().expect("operand expanded");
        let v = match &nodes[i] {
            Node::Param(p) => unit(&names, *p),
            Node::Var(v) => unit(&names, n_params + v),
            Node::Const(q) => MultiPoly::constant(&names, q.clone()),
            Node::Add(a, b) => get(*a) + get(*b),
            Node::Sub(a, b) => get(*a) - get(*b),
            Node::Mul(a, b) => {
                let (x, y) = (get(*a), get(*b));
                let work = x.num_terms().saturating_mul(y.num_terms());
                // each product term is one hash insertion; cap the work too
                if work > budget.saturating_mul(64) {
                    return Err(ExpandError::TooLarge {
                        terms: work,
                        budget,
                    });
                }
                x * y
            }
            Node::Div(a, b) => {
                let d = get(*b);
                let c = d
                    .as_constant()
                    .ok_or(ExpandError::UnsupportedDivision { node: i })?;
                if c == Rational::from_integer(0.into()) {
                    return Err(ExpandError::DivisionByZero { node: i });
                }
                get(*a).scale(&c.recip())
            }
        };
        check(&v)?;
        values[i] = Some(v);
    }
    Ok(values[root].take().expect("root expanded"))
}

fn unit(names: &[String], i: usize) -> MultiPoly {
    let mut e = vec![0; names.len()];
    e[i] = 1;
    MultiPoly::monomial(names, e, Rational::from_integer(1.into()))
}
