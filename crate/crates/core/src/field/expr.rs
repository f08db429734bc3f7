//! Arithmetic expressions in `e` (the infinitesimal) and `i`, evaluated as series.
//!
//! `1/(1-e)` with order 6 gives `1 + e + e^2 + e^3 + e^4 + e^5 + O(e^6)`.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::Series;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

type S = Series<Complex<Rational>>;

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    trunc: Rational,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn expr(&mut self) -> Result<S> {
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

    fn term(&mut self) -> Result<S> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                acc = acc.div(&self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<S> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<S> {
        let is_e = self.peek() == Some(b'e');
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let start = self.pos;
        let q = self.exponent()?;
        if is_e {
            return Ok(S::monomial(Complex::one(), q, self.trunc.clone()));
        }
        if !q.is_integer() {
            self.pos = start;
            return Err(self.err("only e takes fractional powers"));
        }
        let n = q.to_integer().try_into().map_err(|_| self.err("exponent too large"))?;
        base.pow(n)
    }

    fn exponent(&mut self) -> Result<Rational> {
        let close = if self.eat(b'{') {
            Some(b'}')
        } else if self.eat(b'(') {
            Some(b')')
        } else {
            None
        };
        self.peek();
        let start = self.pos;
        let mut end = start;
        while end < self.s.len() {
            let c = self.s[end];
            let ok = c.is_ascii_digit() || (end == start && c == b'-') || (close.is_some() && c == b'/');
            if !ok {
                break;
            }
            end += 1;
        }
        let text = std::str::from_utf8(&self.s[start..end]).unwrap();
        let q = parse_rational(text).map_err(|_| self.err("expected an exponent"))?;
        self.pos = end;
        if let Some(c) = close {
            if !self.eat(c) {
                return Err(self.err(format!("expected '{}'", c as char)));
            }
        }
        Ok(q)
    }

    fn atom(&mut self) -> Result<S> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(v)
            }
            Some(b'e') => {
                self.pos += 1;
                Ok(S::eps(self.trunc.clone()))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(S::constant(Complex::new(Rational::zero(), Rational::one()), self.trunc.clone()))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let q = parse_rational(text).map_err(|_| Error::Parse { pos: start, msg: format!("bad number {text:?}") })?;
                Ok(S::real_constant(q, self.trunc.clone()))
            }
            Some(c) => Err(self.err(format!("unexpected '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Evaluates an expression such as `1/(1-e)` or `(2+e^{1/2})^3` to order `trunc`.
pub fn eval_expr(text: &str, trunc: &Rational) -> Result<S> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, trunc: trunc.clone() };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    if v.trunc() > trunc {
        return Ok(v.truncate(trunc));
    }
    Ok(v)
}
