//! Text form `3/2*e^-1 + 1 + 7/3*e^{5/2} + O(e^8)`, printed and parsed exactly.
//!
//! Complex coefficients print as `(1/2+3i)*e^{1/2}`; purely imaginary ones as
//! `3i*e`. Standard numbers print like any constant series (`7 + O(e^8)`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, Zero};

use super::{default_trunc, Series};
use crate::error::{Error, Result};
use crate::scalar::Rational;

type C = Complex<Rational>;

fn fmt_exp(q: &Rational) -> String {
    if q.is_one() {
        "e".into()
    } else if q.is_integer() {
        format!("e^{q}")
    } else {
        format!("e^{{{q}}}")
    }
}

fn fmt_order(q: &Rational) -> String {
    if q.is_zero() {
        "1".into()
    } else {
        fmt_exp(q)
    }
}

/// `(negative, body)` for one term.
fn fmt_term(q: &Rational, c: &C) -> (bool, String) {
    let attach = |coef: String, unit: bool| -> String {
        if q.is_zero() {
            coef
        } else if unit {
            fmt_exp(q)
        } else {
            format!("{coef}*{}", fmt_exp(q))
        }
    };
    if c.im.is_zero() {
        let m = c.re.abs();
        (c.re.is_negative(), attach(m.to_string(), m.is_one()))
    } else if c.re.is_zero() {
        let m = c.im.abs();
        let coef = if m.is_one() { "i".to_string() } else { format!("{m}i") };
        (c.im.is_negative(), attach(coef, false))
    } else {
        let sign = if c.im.is_negative() { '-' } else { '+' };
        let m = c.im.abs();
        let im = if m.is_one() { "i".to_string() } else { format!("{m}i") };
        (false, attach(format!("({}{sign}{im})", c.re), false))
    }
}

impl fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, c) in self.terms() {
            let (neg, body) = fmt_term(q, c);
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O({})", fmt_order(self.trunc()))
    }
}

impl fmt::Display for Series<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Series::from_real(self).fmt(f)
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
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

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", b as char)))
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    fn rational(&mut self) -> Result<Rational> {
        let neg = self.eat(b'-');
        let n = self.digits()?;
        let d = if self.peek() == Some(b'/') {
            self.pos += 1;
            self.digits()?
        } else {
            BigInt::one()
        };
        if d.is_zero() {
            return Err(self.err("zero denominator"));
        }
        let q = Rational::new(n, d);
        Ok(if neg { -q } else { q })
    }

    /// `e`, `e^n`, `e^-n`, `e^{p/q}`.
    fn epow(&mut self) -> Result<Rational> {
        self.expect(b'e')?;
        if !self.eat(b'^') {
            return Ok(Rational::one());
        }
        if self.eat(b'{') {
            let q = self.rational()?;
            self.expect(b'}')?;
            Ok(q)
        } else {
            let neg = self.eat(b'-');
            let n = Rational::from_integer(self.digits()?);
            Ok(if neg { -n } else { n })
        }
    }

    /// Coefficient with optional trailing `i`.
    fn coefficient(&mut self) -> Result<C> {
        if self.eat(b'(') {
            let re = self.rational()?;
            let neg = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                _ => return Err(self.err("expected '+' or '-' in complex coefficient")),
            };
            self.pos += 1;
            let im = if self.peek() == Some(b'i') { Rational::one() } else { self.rational()? };
            self.expect(b'i')?;
            self.expect(b')')?;
            return Ok(Complex::new(re, if neg { -im } else { im }));
        }
        if self.eat(b'i') {
            return Ok(Complex::new(Rational::zero(), Rational::one()));
        }
        let q = self.rational()?;
        if self.eat(b'i') {
            Ok(Complex::new(Rational::zero(), q))
        } else {
            Ok(Complex::new(q, Rational::zero()))
        }
    }
}

/// Parses the text form; a missing `O(...)` term means the default order 8.
pub fn parse_series(text: &str) -> Result<Series<C>> {
    let mut cur = Cursor { s: text.as_bytes(), pos: 0 };
    let mut terms: Vec<(Rational, C)> = Vec::new();
    let mut trunc: Option<Rational> = None;
    let mut negate = cur.eat(b'-');
    loop {
        if trunc.is_some() {
            return Err(cur.err("the O(...) term must come last"));
        }
        match cur.peek() {
            Some(b'O') => {
                cur.pos += 1;
                cur.expect(b'(')?;
                let t = if cur.peek() == Some(b'1') {
                    cur.pos += 1;
                    Rational::zero()
                } else {
                    cur.epow()?
                };
                cur.expect(b')')?;
                trunc = Some(t);
            }
            Some(b'e') => {
                let q = cur.epow()?;
                terms.push((q, Complex::new(Rational::one(), Rational::zero())));
            }
            Some(_) => {
                let c = cur.coefficient()?;
                let q = if cur.eat(b'*') { cur.epow()? } else { Rational::zero() };
                terms.push((q, c));
            }
            None => return Err(cur.err("unexpected end of input")),
        }
        if negate {
            if let Some(t) = terms.last_mut() {
                t.1 = -t.1.clone();
            }
        }
        negate = match cur.peek() {
            None => break,
            Some(b'+') => false,
            Some(b'-') => true,
            Some(c) => return Err(cur.err(format!("unexpected '{}'", c as char))),
        };
        cur.pos += 1;
    }
    Ok(Series::new(terms, trunc.unwrap_or_else(default_trunc)))
}

impl FromStr for Series<C> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_series(s)
    }
}
