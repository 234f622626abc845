//! Straight-line programs: division-free (or essentially division-free)
//! arithmetic circuits over parameters and variables.
//!
//! A program is a list of nodes in topological order. Input nodes introduce
//! parameters and variables, the remaining nodes are constants and binary
//! operations on earlier nodes. Divisions are only allowed when the divisor
//! does not depend on any variable.

mod text;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::par;
use crate::ring::{ArithError, Field, Rational};

pub use text::{parse_slp, serialize_slp, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Param(usize),
    Var(usize),
    Const(Rational),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
}

impl Node {
    pub fn operands(&self) -> Option<(usize, usize)> {
        match *self {
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => Some((a, b)),
            _ => None,
        }
    }

    fn opcode(&self) -> &'static str {
        match self {
            Node::Param(_) => "param",
            Node::Var(_) => "var",
            Node::Const(_) => "const",
            Node::Add(..) => "add",
            Node::Sub(..) => "sub",
            Node::Mul(..) => "mul",
            Node::Div(..) => "div",
        }
    }
}

/// Sign condition attached to an output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SignMark {
    #[serde(rename = "=0")]
    Zero,
    #[serde(rename = "!=0")]
    NonZero,
}

impl fmt::Display for SignMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignMark::Zero => "=0",
            SignMark::NonZero => "!=0",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub node: usize,
    pub mark: Option<SignMark>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    params: Vec<String>,
    vars: Vec<String>,
    nodes: Vec<Node>,
    labels: Vec<String>,
    outputs: Vec<Output>,
}

/// Whether division nodes are permitted at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivisionPolicy {
    /// Divisions by parameter-only expressions are allowed.
    #[default]
    Essential,
    /// No division nodes.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node {node}: forward reference to node {operand}")]
    ForwardReference { node: usize, operand: usize },
    #[error("node {node}: divisor depends on variable")]
    DivisorDependsOnVariable { node: usize },
    #[error("node {node}: division not allowed in a totally division-free program")]
    DivisionNotAllowed { node: usize },
    #[error("node {node}: input index out of range")]
    InputOutOfRange { node: usize },
    #[error("node {node}: input declared twice or out of declaration order")]
    InputOrder { node: usize },
    #[error("input {name} has no input node")]
    MissingInput { name: String },
    #[error("output {output} references missing node {node}")]
    OutputOutOfRange { output: usize, node: usize },
    #[error("node {node}: duplicate label {label}")]
    DuplicateLabel { node: usize, label: String },
    #[error("label count does not match node count")]
    LabelCount,
}

impl Violation {
    /// Index of the offending node, when there is one.
    pub fn node(&self) -> Option<usize> {
        match self {
            Violation::ForwardReference { node, .. }
            | Violation::DivisorDependsOnVariable { node }
            | Violation::DivisionNotAllowed { node }
            | Violation::InputOutOfRange { node }
            | Violation::InputOrder { node }
            | Violation::DuplicateLabel { node, .. }
            | Violation::OutputOutOfRange { node, .. } => Some(*node),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("pole at specialization: division by zero at node {node}")]
    Pole { node: usize },
    #[error("expected {expected} {kind} values, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("no value assigned to {0}")]
    Unassigned(String),
    #[error("constant at node {node} is not representable: {source}")]
    Constant { node: usize, source: ArithError },
    #[error("invalid program: {0}")]
    Invalid(Violation),
}

/// Size and degree accounting for a program as written.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SlpProfile {
    /// Multiplications whose operands both depend on a variable.
    pub l_over_params: u64,
    /// Multiplications and divisions except those by a pure constant.
    pub l_over_scalars: u64,
    /// All add/sub/mul/div nodes.
    pub total_ops: u64,
    /// Number of outputs.
    pub q: u64,
    pub var_degree_bound: Vec<u64>,
    pub param_degree_bound: Vec<u64>,
}

impl Slp {
    /// Assembles a program without checking it; see [`Slp::validate`].
    pub fn from_parts(
        params: Vec<String>,
        vars: Vec<String>,
        nodes: Vec<Node>,
        labels: Vec<String>,
        outputs: Vec<Output>,
    ) -> Self {
        Self {
            params,
            vars,
            nodes,
            labels,
            outputs,
        }
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn validate(&self) -> Result<(), Violation> {
        self.validate_with(DivisionPolicy::Essential)
    }

    /// Checks every structural invariant and reports the first breach.
    pub fn validate_with(&self, policy: DivisionPolicy) -> Result<(), Violation> {
        if self.labels.len() != self.nodes.len() {
            return Err(Violation::LabelCount);
        }
        let mut seen_labels: HashMap<&str, usize> = HashMap::new();
        let mut next_param = 0;
        let mut next_var = 0;
        let mut var_dep = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if seen_labels.insert(&self.labels[i], i).is_some() {
                return Err(Violation::DuplicateLabel {
                    node: i,
                    label: self.labels[i].clone(),
                });
            }
            if let Some((a, b)) = node.operands() {
                for operand in [a, b] {
                    if operand >= i {
                        return Err(Violation::ForwardReference { node: i, operand });
                    }
                }
            }
            let dep = match *node {
                Node::Param(p) => {
                    if p >= self.params.len() {
                        return Err(Violation::InputOutOfRange { node: i });
                    }
                    if p != next_param {
                        return Err(Violation::InputOrder { node: i });
                    }
                    next_param += 1;
                    false
                }
                Node::Var(v) => {
                    if v >= self.vars.len() {
                        return Err(Violation::InputOutOfRange { node: i });
                    }
                    if v != next_var {
                        return Err(Violation::InputOrder { node: i });
                    }
                    next_var += 1;
                    true
                }
                Node::Const(_) => false,
                Node::Div(a, b) => {
                    if policy == DivisionPolicy::Strict {
                        return Err(Violation::DivisionNotAllowed { node: i });
                    }
                    if var_dep[b] {
                        return Err(Violation::DivisorDependsOnVariable { node: i });
                    }
                    var_dep[a]
                }
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => var_dep[a] || var_dep[b],
            };
            var_dep.push(dep);
        }
        if next_param < self.params.len() {
            return Err(Violation::MissingInput {
                name: self.params[next_param].clone(),
            });
        }
        if next_var < self.vars.len() {
            return Err(Violation::MissingInput {
                name: self.vars[next_var].clone(),
            });
        }
        for (k, out) in self.outputs.iter().enumerate() {
            if out.node >= self.nodes.len() {
                return Err(Violation::OutputOutOfRange {
                    output: k,
                    node: out.node,
                });
            }
        }
        Ok(())
    }

    /// Evaluates every output at the given parameter and variable values.
    pub fn evaluate<F: Field>(
        &self,
        field: &F,
        params: &[F::Elem],
        vars: &[F::Elem],
    ) -> Result<Vec<F::Elem>, EvalError> {
        if params.len() != self.params.len() {
            return Err(EvalError::Arity {
                kind: "parameter",
                expected: self.params.len(),
                got: params.len(),
            });
        }
        if vars.len() != self.vars.len() {
            return Err(EvalError::Arity {
                kind: "variable",
                expected: self.vars.len(),
                got: vars.len(),
            });
        }
        let mut values: Vec<F::Elem> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some((a, b)) = node.operands() {
                let operand = a.max(b);
                if operand >= i {
                    return Err(EvalError::Invalid(Violation::ForwardReference { node: i, operand }));
                }
            }
            let v = match node {
                Node::Param(p) => params
                    .get(*p)
                    .cloned()
                    .ok_or(EvalError::Invalid(Violation::InputOutOfRange { node: i }))?,
                Node::Var(v) => vars
                    .get(*v)
                    .cloned()
                    .ok_or(EvalError::Invalid(Violation::InputOutOfRange { node: i }))?,
                Node::Const(q) => field
                    .from_rational(q)
                    .map_err(|source| EvalError::Constant { node: i, source })?,
                Node::Add(a, b) => field.add(&values[*a], &values[*b]),
                Node::Sub(a, b) => field.sub(&values[*a], &values[*b]),
                Node::Mul(a, b) => field.mul(&values[*a], &values[*b]),
                Node::Div(a, b) => field
                    .div(&values[*a], &values[*b])
                    .map_err(|_| EvalError::Pole { node: i })?,
            };
            values.push(v);
        }
        self.outputs
            .iter()
            .map(|out| {
                values.get(out.node).cloned().ok_or(EvalError::Invalid(
                    Violation::OutputOutOfRange {
                        output: 0,
                        node: out.node,
                    },
                ))
            })
            .collect()
    }

    /// Evaluates with inputs looked up by name.
    pub fn evaluate_named<F: Field>(
        &self,
        field: &F,
        assignment: &HashMap<String, F::Elem>,
    ) -> Result<Vec<F::Elem>, EvalError> {
        let lookup = |names: &[String]| -> Result<Vec<F::Elem>, EvalError> {
            names
                .iter()
                .map(|n| {
                    assignment
                        .get(n)
                        .cloned()
                        .ok_or_else(|| EvalError::Unassigned(n.clone()))
                })
                .collect()
        };
        let params = lookup(&self.params)?;
        let vars = lookup(&self.vars)?;
        self.evaluate(field, &params, &vars)
    }

    /// Evaluates at many variable points with fixed parameters, in parallel
    /// when the `parallel` feature is on. Output order follows `points`.
    pub fn evaluate_batch<F: Field>(
        &self,
        field: &F,
        params: &[F::Elem],
        points: &[Vec<F::Elem>],
    ) -> Result<Vec<Vec<F::Elem>>, EvalError> {
        par::try_map_range(points.len(), |i| self.evaluate(field, params, &points[i]))
    }

    /// Per-node flags: (depends on a variable, depends on a parameter).
    fn dependencies(&self) -> Vec<(bool, bool)> {
        let mut deps: Vec<(bool, bool)> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let d = match *node {
                Node::Param(_) => (false, true),
                Node::Var(_) => (true, false),
                Node::Const(_) => (false, false),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    (deps[a].0 || deps[b].0, deps[a].1 || deps[b].1)
                }
            };
            deps.push(d);
        }
        deps
    }

    /// Whether the program contains a division node.
    pub fn has_division(&self) -> bool {
        self.nodes.iter().any(|n| matches!(n, Node::Div(..)))
    }

    /// Nonscalar sizes, operation count and degree bounds. Assumes a valid
    /// program.
    pub fn profile(&self) -> SlpProfile {
        let deps = self.dependencies();
        let scalar = |i: usize| !deps[i].0 && !deps[i].1;
        let mut l_over_params = 0;
        let mut l_over_scalars = 0;
        let mut total_ops = 0;
        let mut var_deg: Vec<u64> = Vec::with_capacity(self.nodes.len());
        let mut param_deg: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let (dv, dp) = match *node {
                Node::Param(_) => (0, 1),
                Node::Var(_) => (1, 0),
                Node::Const(_) => (0, 0),
                Node::Add(a, b) | Node::Sub(a, b) => {
                    total_ops += 1;
                    (var_deg[a].max(var_deg[b]), param_deg[a].max(param_deg[b]))
                }
                Node::Mul(a, b) => {
                    total_ops += 1;
                    if deps[a].0 && deps[b].0 {
                        l_over_params += 1;
                    }
                    if !scalar(a) && !scalar(b) {
                        l_over_scalars += 1;
                    }
                    (
                        var_deg[a].saturating_add(var_deg[b]),
                        param_deg[a].saturating_add(param_deg[b]),
                    )
                }
                Node::Div(a, b) => {
                    total_ops += 1;
                    if !scalar(b) {
                        l_over_scalars += 1;
                    }
                    // divisor is variable-free; the numerator bounds the result
                    (var_deg[a], param_deg[a])
                }
            };
            var_deg.push(dv);
            param_deg.push(dp);
        }
        SlpProfile {
            l_over_params,
            l_over_scalars,
            total_ops,
            q: self.outputs.len() as u64,
            var_degree_bound: self.outputs.iter().map(|o| var_deg[o.node]).collect(),
            param_degree_bound: self.outputs.iter().map(|o| param_deg[o.node]).collect(),
        }
    }
}

/// Size of the rearranged program for nonscalar size `l`, `t` variables and
/// `q` outputs: `l^2 + (2t - 1) l + q (l + t + 1)`.
pub fn rearranged_size(l: u64, t: u64, q: u64) -> u64 {
    // (2t - 1) l may be negative only when t = 0, in which case l^2 - l >= 0
    l * l + 2 * t * l - l + q * (l + t + 1)
}

/// Incremental construction of well-formed programs. Parameters and
/// variables become the first nodes; instructions are labelled `t0, t1, ...`.
#[derive(Debug, Clone)]
pub struct SlpBuilder {
    slp: Slp,
    next_label: usize,
    consts: HashMap<Rational, usize>,
}

impl SlpBuilder {
    pub fn new<S: AsRef<str>>(params: &[S], vars: &[S]) -> Self {
        let params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        let mut nodes = Vec::new();
        let mut labels = Vec::new();
        for (i, p) in params.iter().enumerate() {
            nodes.push(Node::Param(i));
            labels.push(p.clone());
        }
        for (i, v) in vars.iter().enumerate() {
            nodes.push(Node::Var(i));
            labels.push(v.clone());
        }
        Self {
            slp: Slp::from_parts(params, vars, nodes, labels, Vec::new()),
            next_label: 0,
            consts: HashMap::new(),
        }
    }

    /// Node index of parameter `i`.
    pub fn param(&self, i: usize) -> usize {
        assert!(i < self.slp.params.len());
        i
    }

    /// Node index of variable `i`.
    pub fn var(&self, i: usize) -> usize {
        assert!(i < self.slp.vars.len());
        self.slp.params.len() + i
    }

    fn push(&mut self, node: Node) -> usize {
        if let Some((a, b)) = node.operands() {
            assert!(a < self.slp.nodes.len() && b < self.slp.nodes.len());
        }
        let label = loop {
            let candidate = format!("t{}", self.next_label);
            self.next_label += 1;
            if !self.slp.labels.contains(&candidate) {
                break candidate;
            }
        };
        self.slp.nodes.push(node);
        self.slp.labels.push(label);
        self.slp.nodes.len() - 1
    }

    /// A constant node; repeated constants share one node.
    pub fn constant(&mut self, q: Rational) -> usize {
        if let Some(&i) = self.consts.get(&q) {
            return i;
        }
        let i = self.push(Node::Const(q.clone()));
        self.consts.insert(q, i);
        i
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        self.push(Node::Add(a, b))
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        self.push(Node::Sub(a, b))
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        self.push(Node::Mul(a, b))
    }

    pub fn div(&mut self, a: usize, b: usize) -> usize {
        self.push(Node::Div(a, b))
    }

    /// `base^exp` by repeated squaring; `exp >= 1`.
    pub fn pow(&mut self, base: usize, exp: u64) -> usize {
        assert!(exp >= 1);
        let mut acc: Option<usize> = None;
        let mut sq = base;
        let mut e = exp;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => sq,
                    Some(a) => self.mul(a, sq),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = self.mul(sq, sq);
        }
        acc.expect("exp >= 1")
    }

    pub fn output(&mut self, node: usize, mark: Option<SignMark>) {
        self.slp.outputs.push(Output { node, mark });
    }

    pub fn finish(self) -> Slp {
        debug_assert_eq!(self.slp.validate(), Ok(()));
        self.slp
    }
}

impl fmt::Display for Slp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_slp(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, Fp64, Rationals};

    fn squaring_chain(n: usize) -> Slp {
        let mut b = SlpBuilder::new(&["T"], &["Y"]);
        let mut cur = b.var(0);
        for _ in 0..n {
            cur = b.mul(cur, cur);
        }
        b.output(cur, None);
        b.finish()
    }

    #[test]
    fn squaring_chain_profile() {
        for n in 0..8 {
            let p = squaring_chain(n).profile();
            assert_eq!(p.l_over_params, n as u64);
            assert_eq!(p.var_degree_bound, vec![1u64 << n]);
        }
    }

    #[test]
    fn one_plus_t_power() {
        // (1+T)^(2^3) at T = 1
        let mut b = SlpBuilder::new(&["T"], &[] as &[&str]);
        let one = b.constant(rat(1));
        let mut cur = b.add(one, b.param(0));
        for _ in 0..3 {
            cur = b.mul(cur, cur);
        }
        b.output(cur, None);
        let slp = b.finish();
        assert_eq!(slp.evaluate(&Rationals, &[rat(1)], &[]).unwrap(), vec![rat(256)]);
        let f = Fp64::new(257).unwrap();
        assert_eq!(slp.evaluate(&f, &[1], &[]).unwrap(), vec![256]);
        // parameter-only products are free over K
        assert_eq!(slp.profile().l_over_params, 0);
        assert_eq!(slp.profile().l_over_scalars, 3);
    }

    #[test]
    fn parameter_product_is_free() {
        let mut b = SlpBuilder::new(&["U_1", "U_2"], &[] as &[&str]);
        let m = b.mul(b.param(0), b.param(1));
        b.output(m, None);
        let p = b.finish().profile();
        assert_eq!(p.l_over_params, 0);
        assert_eq!(p.l_over_scalars, 1);
        assert_eq!(p.param_degree_bound, vec![2]);
    }

    #[test]
    fn zero_constant_program() {
        let mut b = SlpBuilder::new(&[] as &[&str], &["Y"]);
        let z = b.constant(rat(0));
        let s = b.add(z, z);
        b.output(s, None);
        let slp = b.finish();
        assert_eq!(slp.evaluate(&Rationals, &[], &[rat(7)]).unwrap(), vec![rat(0)]);
    }

    #[test]
    fn validate_reports_divisor_on_variable() {
        let mut b = SlpBuilder::new(&["U"], &["Y"]);
        let d = b.div(b.param(0), b.var(0));
        b.output(d, None);
        let slp = b.slp.clone();
        let err = slp.validate().unwrap_err();
        assert_eq!(err, Violation::DivisorDependsOnVariable { node: 2 });
        assert!(err.to_string().contains("divisor depends on variable"));
    }

    #[test]
    fn validate_reports_forward_reference() {
        let slp = Slp::from_parts(
            vec![],
            vec!["Y".into()],
            vec![Node::Var(0), Node::Mul(0, 2), Node::Const(rat(1))],
            vec!["Y".into(), "t0".into(), "t1".into()],
            vec![Output { node: 1, mark: None }],
        );
        let err = slp.validate().unwrap_err();
        assert_eq!(err, Violation::ForwardReference { node: 1, operand: 2 });
        assert_eq!(err.node(), Some(1));
        assert!(err.to_string().contains("forward reference"));
        assert!(matches!(
            slp.evaluate(&Rationals, &[], &[rat(1)]),
            Err(EvalError::Invalid(_))
        ));
    }

    #[test]
    fn strict_policy_rejects_division() {
        let mut b = SlpBuilder::new(&["U"], &["Y"]);
        let two = b.constant(rat(2));
        let d = b.div(b.var(0), two);
        b.output(d, None);
        let slp = b.finish();
        assert_eq!(slp.validate(), Ok(()));
        assert_eq!(
            slp.validate_with(DivisionPolicy::Strict),
            Err(Violation::DivisionNotAllowed { node: 3 })
        );
        // division by a constant is free in both sizes
        let p = slp.profile();
        assert_eq!((p.l_over_params, p.l_over_scalars), (0, 0));
    }

    #[test]
    fn pole_carries_node_index() {
        let mut b = SlpBuilder::new(&["U"], &["Y"]);
        let one = b.constant(rat(1));
        let den = b.sub(b.param(0), one);
        let d = b.div(b.var(0), den);
        b.output(d, None);
        let slp = b.finish();
        assert_eq!(
            slp.evaluate(&Rationals, &[rat(1)], &[rat(3)]),
            Err(EvalError::Pole { node: d })
        );
        assert_eq!(
            slp.evaluate(&Rationals, &[rat(3)], &[rat(4)]).unwrap(),
            vec![rat(2)]
        );
    }

    #[test]
    fn named_evaluation_and_arity() {
        let slp = squaring_chain(2);
        let mut env = HashMap::new();
        env.insert("Y".to_string(), rat(3));
        assert!(matches!(
            slp.evaluate_named(&Rationals, &env),
            Err(EvalError::Unassigned(_))
        ));
        env.insert("T".to_string(), rat(0));
        assert_eq!(slp.evaluate_named(&Rationals, &env).unwrap(), vec![rat(81)]);
        assert!(matches!(
            slp.evaluate(&Rationals, &[], &[rat(1)]),
            Err(EvalError::Arity { .. })
        ));
    }

    #[test]
    fn batch_matches_pointwise() {
        let slp = squaring_chain(3);
        let points: Vec<Vec<_>> = (0..50).map(|i| vec![rat(i - 25)]).collect();
        let batch = slp.evaluate_batch(&Rationals, &[rat(0)], &points).unwrap();
        for (p, v) in points.iter().zip(&batch) {
            assert_eq!(*v, slp.evaluate(&Rationals, &[rat(0)], p).unwrap());
        }
    }

    #[test]
    fn rearranged_size_values() {
        assert_eq!(rearranged_size(3, 2, 1), 24);
        assert_eq!(rearranged_size(0, 1, 1), 2);
        assert_eq!(rearranged_size(0, 0, 0), 0);
        assert_eq!(rearranged_size(1, 0, 0), 0);
        // against direct signed substitution
        for l in 0..10i64 {
            for t in 0..5i64 {
                for q in 0..4i64 {
                    let m = l * l + (2 * t - 1) * l + q * (l + t + 1);
                    assert_eq!(rearranged_size(l as u64, t as u64, q as u64) as i64, m);
                }
            }
        }
    }
}
