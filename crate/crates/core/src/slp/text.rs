//! Line-based text format for programs.
//!
//! ```text
//! slp v1
//! param U
//! var Y
//! t0 = mul U Y
//! t1 = add t0 Y
//! output t1 !=0
//! ```
//!
//! `#` starts a comment. Operands are earlier instruction ids or declared
//! parameter/variable names.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Node, Output, SignMark, Slp};
use crate::ring::parse_rational;

const HEADER: &str = "slp v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Default)]
struct Program {
    params: Vec<String>,
    vars: Vec<String>,
    nodes: Vec<Node>,
    labels: Vec<String>,
    outputs: Vec<Output>,
    index: HashMap<String, usize>,
}

impl Program {
    fn declare(&mut self, line: usize, name: &str, node: Node) -> Result<usize, ParseError> {
        if !is_identifier(name) {
            return Err(ParseError {
                line,
                reason: format!("invalid identifier {name:?}"),
            });
        }
        if self.index.contains_key(name) {
            return Err(ParseError {
                line,
                reason: format!("duplicate identifier {name:?}"),
            });
        }
        self.nodes.push(node);
        self.labels.push(name.to_string());
        self.index.insert(name.to_string(), self.nodes.len() - 1);
        Ok(self.nodes.len() - 1)
    }

    fn resolve(&self, line: usize, name: &str) -> Result<usize, ParseError> {
        self.index.get(name).copied().ok_or_else(|| ParseError {
            line,
            reason: format!("unknown identifier {name:?}"),
        })
    }
}

pub fn parse_slp(text: &str) -> Result<Slp, ParseError> {
    let mut prog = Program::default();
    let mut seen_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |reason: String| ParseError {
            line: line_no,
            reason,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line.split_whitespace().collect::<Vec<_>>().join(" ") != HEADER {
                return Err(err(format!("expected header {HEADER:?}")));
            }
            seen_header = true;
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["param", name] => {
                let i = prog.params.len();
                prog.declare(line_no, name, Node::Param(i))?;
                prog.params.push(name.to_string());
            }
            ["var", name] => {
                let i = prog.vars.len();
                prog.declare(line_no, name, Node::Var(i))?;
                prog.vars.push(name.to_string());
            }
            ["output", id, rest @ ..] => {
                let node = prog.resolve(line_no, id)?;
                let mark = match rest {
                    [] => None,
                    ["=0"] => Some(SignMark::Zero),
                    ["!=0"] => Some(SignMark::NonZero),
                    _ => return Err(err(format!("invalid sign mark {:?}", rest.join(" ")))),
                };
                prog.outputs.push(Output { node, mark });
            }
            [id, "=", "const", value] => {
                let q = parse_rational(value)
                    .map_err(|e| err(format!("invalid constant {value:?}: {e}")))?;
                prog.declare(line_no, id, Node::Const(q))?;
            }
            [id, "=", op, a, b] => {
                let (a, b) = (prog.resolve(line_no, a)?, prog.resolve(line_no, b)?);
                let node = match *op {
                    "add" => Node::Add(a, b),
                    "sub" => Node::Sub(a, b),
                    "mul" => Node::Mul(a, b),
                    "div" => Node::Div(a, b),
                    other => return Err(err(format!("unknown opcode {other:?}"))),
                };
                prog.declare(line_no, id, node)?;
            }
            [_, "=", op, ..] => return Err(err(format!("unknown opcode or arity for {op:?}"))),
            _ => return Err(err(format!("unrecognized line {line:?}"))),
        }
    }
    if !seen_header {
        return Err(ParseError {
            line: 1,
            reason: format!("expected header {HEADER:?}"),
        });
    }
    Ok(Slp::from_parts(
        prog.params,
        prog.vars,
        prog.nodes,
        prog.labels,
        prog.outputs,
    ))
}

pub fn serialize_slp(slp: &Slp) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    let labels = slp.labels();
    for (i, node) in slp.nodes().iter().enumerate() {
        let label = &labels[i];
        match node {
            Node::Param(_) => writeln!(out, "param {label}"),
            Node::Var(_) => writeln!(out, "var {label}"),
            Node::Const(q) => writeln!(out, "{label} = const {q}"),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => writeln!(
                out,
                "{label} = {} {} {}",
                node.opcode(),
                labels[*a],
                labels[*b]
            ),
        }
        .expect("writing to a String cannot fail");
    }
    for o in slp.outputs() {
        match o.mark {
            Some(mark) => writeln!(out, "output {} {mark}", labels[o.node]),
            None => writeln!(out, "output {}", labels[o.node]),
        }
        .expect("writing to a String cannot fail");
    }
    out
}
