//! Reader for polynomial text such as `Y^2 - 6*Y + 11` or `(X_1 + 1/2)*T`.
//!
//! Grammar: sums and differences of products; `^` takes a nonnegative integer
//! exponent; `/` is only allowed with a numeric divisor.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{MultiPoly, PolyError};
use crate::ring::Rational;

/// Parses with variables ordered by first appearance.
pub fn parse_poly(text: &str) -> Result<MultiPoly, PolyError> {
    let mut p = Parser::new(text);
    let poly = p.parse()?;
    let order = p.seen.clone();
    poly.with_vars(&order)
}

/// Parses into a fixed variable order; unknown names are rejected.
pub fn parse_poly_in<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<MultiPoly, PolyError> {
    let mut p = Parser::new(text);
    let poly = p.parse()?;
    poly.with_vars(vars)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    seen: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            src: text.as_bytes(),
            pos: 0,
            seen: Vec::new(),
        }
    }

    fn error(&self, reason: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(&mut self) -> Result<MultiPoly, PolyError> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, PolyError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let d = self.number()?;
                if d.is_zero() {
                    return Err(PolyError::Arith(crate::ring::ArithError::DivisionByZero));
                }
                acc = acc.scale(&(Rational::one() / d));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly, PolyError> {
        if self.eat(b'-') {
            return Ok(-&self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<MultiPoly, PolyError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.number()?;
            if !e.is_integer() {
                return Err(self.error("exponent must be an integer"));
            }
            let e: i64 = e
                .numer()
                .try_into()
                .map_err(|_| self.error("exponent too large"))?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let q = self.number()?;
                Ok(MultiPoly::constant(&[] as &[&str], q))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii")
                    .to_string();
                if !self.seen.contains(&name) {
                    self.seen.push(name.clone());
                }
                Ok(MultiPoly::var(&name))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Rational, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let n: BigInt = digits.parse().map_err(|_| self.error("bad integer"))?;
        Ok(Rational::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat_frac;

    #[test]
    fn precedence_and_parentheses() {
        let p = parse_poly("2*(X + 1)^2 - X/2").unwrap();
        assert_eq!(p.to_string(), "2*X^2 + 7/2*X + 2");
        assert_eq!(parse_poly("-X^2").unwrap().to_string(), "-X^2");
        assert_eq!(
            parse_poly("3/4").unwrap().as_constant(),
            Some(rat_frac(3, 4))
        );
    }

    #[test]
    fn variable_order_follows_first_appearance() {
        let p = parse_poly("Y + X*Y").unwrap();
        assert_eq!(p.vars(), ["Y".to_string(), "X".to_string()]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_poly("X +").is_err());
        assert!(parse_poly("X / Y").is_err());
        assert!(parse_poly("X / 0").is_err());
        assert!(parse_poly("(X").is_err());
        assert!(parse_poly("X $").is_err());
        assert!(parse_poly_in("X + Z", &["X", "Y"]).is_err());
    }
}
