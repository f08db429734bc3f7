//! A small exact calculus of distributions on the line: Dirac derivatives,
//! Heaviside steps, the principal value of `1/x` and piecewise-polynomial
//! densities, closed under rational linear combinations and derivatives.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::exact::io::rational_str;
use crate::exact::{ln_enclosure, Enclosure, Polynomial, Value};
use crate::scalar::{int, parse_rational, rpow, Rational};
use crate::PiecewisePoly;

#[derive(Clone, Debug, PartialEq)]
pub enum Dist {
    /// `δ_a^{(n)}`.
    DeltaDeriv { order: usize, at: Rational },
    /// `H(x - a)`.
    Heaviside { at: Rational },
    /// `p.v. 1/x`.
    PrincipalValue,
    /// `L(f)` for a locally integrable piecewise polynomial `f`.
    Density(PiecewisePoly),
    Scale(Rational, Box<Dist>),
    Sum(Box<Dist>, Box<Dist>),
    Derivative(usize, Box<Dist>),
}

impl Dist {
    pub fn delta(at: Rational) -> Self {
        Dist::DeltaDeriv { order: 0, at }
    }

    pub fn heaviside(at: Rational) -> Self {
        Dist::Heaviside { at }
    }

    pub fn zero() -> Self {
        Dist::Density(PiecewisePoly::zero())
    }

    pub fn scale(self, c: Rational) -> Self {
        Dist::Scale(c, Box::new(self))
    }

    pub fn plus(self, other: Dist) -> Self {
        Dist::Sum(Box::new(self), Box::new(other))
    }

    pub fn derivative(self, n: usize) -> Self {
        Dist::Derivative(n, Box::new(self))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Dist::DeltaDeriv { .. } | Dist::Heaviside { .. } | Dist::PrincipalValue | Dist::Density(_))
    }

    /// Whether any principal-value term occurs.
    pub fn has_pv(&self) -> bool {
        match self {
            Dist::PrincipalValue => true,
            Dist::Scale(_, t) | Dist::Derivative(_, t) => t.has_pv(),
            Dist::Sum(a, b) => a.has_pv() || b.has_pv(),
            _ => false,
        }
    }

    /// Flat list `Σ c_i T_i` with `T_i` an atom or `D^n(p.v. 1/x)`, derivatives pushed to the atoms.
    pub fn terms(&self) -> Result<Vec<(Rational, Dist)>> {
        let mut out = Vec::new();
        collect(self, &Rational::one(), 0, &mut out)?;
        Ok(out)
    }

    /// Canonical form: derivatives pushed to atoms, equal atoms and all
    /// densities merged, zero and unit scales dropped.
    pub fn canonical(&self) -> Result<Dist> {
        let mut density = PiecewisePoly::zero();
        let mut seen_density = false;
        let mut items: Vec<Option<(Rational, Dist)>> = Vec::new();
        for (c, t) in self.terms()? {
            if let Dist::Density(f) = &t {
                density = density.add(&f.scale(&c));
                if !seen_density {
                    seen_density = true;
                    items.push(None);
                }
            } else if let Some((acc, _)) = items.iter_mut().flatten().find(|(_, u)| *u == t) {
                *acc += c;
            } else {
                items.push(Some((c, t)));
            }
        }
        let mut parts: Vec<Dist> = Vec::new();
        for it in items {
            match it {
                None if !density.is_zero() => parts.push(Dist::Density(density.clone())),
                None => {}
                Some((c, _)) if c.is_zero() => {}
                Some((c, t)) if c.is_one() => parts.push(t),
                Some((c, t)) => parts.push(t.scale(c)),
            }
        }
        Ok(parts.into_iter().reduce(Dist::plus).unwrap_or_else(Dist::zero))
    }
}

fn collect(t: &Dist, c: &Rational, n: usize, out: &mut Vec<(Rational, Dist)>) -> Result<()> {
    match t {
        Dist::Scale(k, inner) => collect(inner, &(c * k), n, out),
        Dist::Sum(a, b) => {
            collect(a, c, n, out)?;
            collect(b, c, n, out)
        }
        Dist::Derivative(m, inner) => collect(inner, c, n + m, out),
        Dist::DeltaDeriv { order, at } => {
            out.push((c.clone(), Dist::DeltaDeriv { order: order + n, at: at.clone() }));
            Ok(())
        }
        Dist::Heaviside { at } if n > 0 => {
            out.push((c.clone(), Dist::DeltaDeriv { order: n - 1, at: at.clone() }));
            Ok(())
        }
        Dist::Heaviside { .. } => {
            out.push((c.clone(), t.clone()));
            Ok(())
        }
        Dist::PrincipalValue if n > 0 => {
            out.push((c.clone(), t.clone().derivative(n)));
            Ok(())
        }
        Dist::PrincipalValue => {
            out.push((c.clone(), Dist::PrincipalValue));
            Ok(())
        }
        Dist::Density(f) if n > 0 => {
            // D L(f) = L(f') + Σ jump · δ_at
            let mut next = Dist::Density(f.piecewise_derivative());
            for (at, jump) in f.jumps() {
                next = next.plus(Dist::delta(at).scale(jump));
            }
            collect(&next, c, n - 1, out)
        }
        Dist::Density(f) => {
            out.push((c.clone(), Dist::Density(f.clone())));
            Ok(())
        }
    }
}

fn fmt_rational_at(f: &mut fmt::Formatter<'_>, at: &Rational) -> fmt::Result {
    if at.is_zero() {
        Ok(())
    } else {
        write!(f, "@{at}")
    }
}

fn fmt_density(f: &mut fmt::Formatter<'_>, g: &PiecewisePoly) -> fmt::Result {
    if g.is_zero() {
        return write!(f, "poly:0@[0,1]");
    }
    let mut first = true;
    for (i, p) in g.polys().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let (lo, hi) = g.piece_bounds(i);
        let coeffs: Vec<String> = p.coeffs().iter().map(|c| c.to_string()).collect();
        let lo = lo.map_or("-inf".to_string(), |v| v.to_string());
        let hi = hi.map_or("inf".to_string(), |v| v.to_string());
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        write!(f, "poly:{}@[{lo},{hi}]", coeffs.join(","))?;
    }
    Ok(())
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::DeltaDeriv { order: 0, at } => {
                write!(f, "delta")?;
                fmt_rational_at(f, at)
            }
            Dist::DeltaDeriv { order, at } => {
                write!(f, "delta^({order})")?;
                fmt_rational_at(f, at)
            }
            Dist::Heaviside { at } => {
                write!(f, "heaviside")?;
                fmt_rational_at(f, at)
            }
            Dist::PrincipalValue => write!(f, "pv1x"),
            Dist::Density(g) => {
                let multi = g.polys().iter().filter(|p| !p.is_zero()).count() > 1;
                if multi {
                    write!(f, "(")?;
                }
                fmt_density(f, g)?;
                if multi {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Dist::Scale(c, t) => {
                let inner = if t.is_atom() { t.to_string() } else { format!("({t})") };
                if c.is_negative() {
                    write!(f, "-")?;
                }
                write!(f, "{}*{inner}", c.abs())
            }
            Dist::Sum(a, b) => {
                write!(f, "{a}")?;
                match &**b {
                    Dist::Scale(c, t) if c.is_negative() => {
                        let inner = if t.is_atom() { t.to_string() } else { format!("({t})") };
                        write!(f, " - {}*{inner}", -c)
                    }
                    Dist::Sum(..) => write!(f, " + ({b})"),
                    _ => write!(f, " + {b}"),
                }
            }
            Dist::Derivative(n, t) => write!(f, "D^{n}({t})"),
        }
    }
}

/// Parses the distribution grammar and returns the canonical form.
///
/// ```text
/// dist  := ["-"] term (("+" | "-") term)*
/// term  := num "*" term | "(" dist ")" | "D^" n "(" dist ")" | "D(" dist ")" | atom
/// atom  := delta["^(" n ")"]["@" a] | heaviside["@" a] | pv1x | poly:c0,c1,...@[a,b]
/// ```
pub fn parse_distribution(text: &str) -> Result<Dist> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let d = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    d.canonical()
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Dist> {
        let mut acc = if self.eat(b'-') { self.term()?.scale(-Rational::one()) } else { self.term()? };
        loop {
            if self.eat(b'+') {
                acc = acc.plus(self.term()?);
            } else if self.eat(b'-') {
                acc = acc.plus(self.term()?.scale(-Rational::one()));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Dist> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let q = self.number()?;
                self.expect(b'*')?;
                Ok(self.term()?.scale(q))
            }
            Some(b'(') => {
                self.pos += 1;
                let d = self.expr()?;
                self.expect(b')')?;
                Ok(d)
            }
            Some(_) => self.word_term(),
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// Unsigned number: digits with an optional `/q`, `.frac` or `^e` suffix.
    fn number(&mut self) -> Result<Rational> {
        self.ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        match self.s.get(self.pos) {
            Some(b'/') | Some(b'.') => {
                self.pos += 1;
                digits(self);
            }
            Some(b'^') => {
                self.pos += 1;
                if self.s.get(self.pos) == Some(&b'-') {
                    self.pos += 1;
                }
                digits(self);
            }
            _ => {}
        }
        let lexeme = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        parse_rational(lexeme).map_err(|_| Error::Parse { pos: start, msg: format!("bad number {lexeme:?}") })
    }

    fn signed_number(&mut self) -> Result<Rational> {
        let neg = self.eat(b'-');
        let q = self.number()?;
        Ok(if neg { -q } else { q })
    }

    fn at_point(&mut self) -> Result<Rational> {
        if self.eat(b'@') {
            self.signed_number()
        } else {
            Ok(Rational::zero())
        }
    }

    fn count(&mut self) -> Result<usize> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .expect("ascii")
            .parse()
            .map_err(|_| Error::Parse { pos: start, msg: "expected a nonnegative integer".into() })
    }

    fn word_term(&mut self) -> Result<Dist> {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii").to_string();
        match word.as_str() {
            "" => Err(Error::Parse { pos: start, msg: "expected a distribution".into() }),
            "D" => {
                let n = if self.s.get(self.pos) == Some(&b'^') {
                    self.pos += 1;
                    self.count()?
                } else {
                    1
                };
                self.expect(b'(')?;
                let d = self.expr()?;
                self.expect(b')')?;
                Ok(d.derivative(n))
            }
            "delta" => {
                let order = if self.s.get(self.pos) == Some(&b'^') {
                    self.pos += 1;
                    self.expect(b'(')?;
                    let n = self.count()?;
                    self.expect(b')')?;
                    n
                } else {
                    0
                };
                Ok(Dist::DeltaDeriv { order, at: self.at_point()? })
            }
            "heaviside" => Ok(Dist::Heaviside { at: self.at_point()? }),
            "pv1x" => Ok(Dist::PrincipalValue),
            "poly" => {
                self.expect(b':')?;
                let mut coeffs = vec![self.signed_number()?];
                while self.eat(b',') {
                    coeffs.push(self.signed_number()?);
                }
                self.expect(b'@')?;
                self.expect(b'[')?;
                let lo = self.end_point()?;
                self.expect(b',')?;
                let hi = self.end_point()?;
                self.expect(b']')?;
                poly_density(Polynomial::new(coeffs), lo, hi).map(Dist::Density)
            }
            _ => Err(Error::UnknownAtom(word)),
        }
    }

    fn end_point(&mut self) -> Result<Option<Rational>> {
        self.ws();
        let rest = &self.s[self.pos..];
        for tok in ["-inf", "+inf", "inf"] {
            if rest.starts_with(tok.as_bytes()) {
                self.pos += tok.len();
                return Ok(None);
            }
        }
        self.signed_number().map(Some)
    }
}

/// `p` on `[lo, hi]` (either end possibly infinite), zero elsewhere.
pub fn poly_density(p: Polynomial<Rational>, lo: Option<Rational>, hi: Option<Rational>) -> Result<PiecewisePoly> {
    match (lo, hi) {
        (Some(a), Some(b)) => PiecewisePoly::on_interval(p, a, b),
        (Some(a), None) => Ok(PiecewisePoly::step(a).mul_poly(&p)),
        (None, Some(b)) => Ok(PiecewisePoly::global(p.clone()).sub(&PiecewisePoly::step(b).mul_poly(&p))),
        (None, None) => Ok(PiecewisePoly::global(p)),
    }
}

/// `f^{(n)}` as a piecewise function; needs `f ∈ C^{n-1}` so no point masses appear.
pub fn weak_derivative(f: &PiecewisePoly, n: usize, atom: &str) -> Result<PiecewisePoly> {
    let mut g = f.clone();
    for j in 0..n {
        if let Some(k) = g.knots().iter().find(|k| !g.is_smooth_at(k, 0)) {
            return Err(Error::NotSmoothAt { atom: atom.into(), point: k.to_string(), order: j as u32 });
        }
        g = g.piecewise_derivative();
    }
    Ok(g)
}

fn require_compact(phi: &PiecewisePoly) -> Result<()> {
    if phi.is_compact() {
        Ok(())
    } else {
        Err(Error::NotCompact)
    }
}

/// `p.v. ∫ ψ(x)/x dx` for compactly supported `ψ` continuous at 0.
///
/// The polynomial part `(p(x) - p(0))/x` integrates exactly on every piece;
/// the remaining `(p(0) - ψ(0)) ln(v/u)` terms are enclosed to total width `tol`.
pub fn pv_integral(psi: &PiecewisePoly, tol: &Rational) -> Result<Value> {
    require_compact(psi)?;
    if !psi.is_smooth_at(&Rational::zero(), 0) {
        return Err(Error::NotSmoothAt { atom: "pv1x".into(), point: "0".into(), order: 0 });
    }
    let Some((s0, s1)) = psi.support() else {
        return Ok(Value::exact(Rational::zero()));
    };
    let r = s0.abs().max(s1.abs());
    let c = psi.eval(&Rational::zero());
    let mut cuts: Vec<Rational> = psi.knots().iter().filter(|k| k.abs() < r).cloned().collect();
    cuts.extend([-r.clone(), Rational::zero(), r.clone()]);
    cuts.sort();
    cuts.dedup();
    let mut exact = Rational::zero();
    let mut logs: Vec<(Rational, Rational)> = Vec::new();
    for w in cuts.windows(2) {
        let (u, v) = (&w[0], &w[1]);
        let mid = (u + v) / int(2);
        let p = piece_at(psi, &mid);
        let p0 = p.coeff(0);
        let q = Polynomial::new(p.coeffs().iter().skip(1).cloned().collect());
        let qa = q.antiderivative();
        exact += qa.eval(v) - qa.eval(u);
        let coeff = &p0 - &c;
        if !coeff.is_zero() {
            logs.push((coeff, v / u));
        }
    }
    if logs.is_empty() {
        return Ok(Value::exact(exact));
    }
    let mut enc = Enclosure::point(exact);
    let n = int(logs.len() as i64);
    for (coeff, ratio) in logs {
        let t = tol / (&n * coeff.abs());
        enc = enc + ln_enclosure(&ratio, &t).scale(&coeff);
    }
    Ok(Value::Enclosure(enc))
}

fn piece_at(f: &PiecewisePoly, x: &Rational) -> Polynomial<Rational> {
    let i = f.knots().iter().take_while(|k| *k <= x).count();
    f.polys()[i].clone()
}

/// `⟨T, φ⟩` for compactly supported `φ`; exact except for principal-value terms.
pub fn pair(t: &Dist, phi: &PiecewisePoly, tol: &Rational) -> Result<Value> {
    require_compact(phi)?;
    let terms = t.terms()?;
    let n = int(terms.len().max(1) as i64);
    let sub_tol = tol / n;
    let mut acc = Value::exact(Rational::zero());
    for (c, atom) in terms {
        acc = acc + pair_atom(&atom, phi, &sub_tol)?.scale(&c);
    }
    Ok(acc)
}

fn pair_atom(t: &Dist, phi: &PiecewisePoly, tol: &Rational) -> Result<Value> {
    Ok(match t {
        Dist::DeltaDeriv { order, at } => {
            if !phi.is_smooth_at(at, *order) {
                return Err(Error::NotSmoothAt { atom: t.to_string(), point: at.to_string(), order: *order as u32 });
            }
            let mut g = phi.clone();
            for _ in 0..*order {
                g = g.piecewise_derivative();
            }
            let v = g.eval(at);
            Value::exact(if order % 2 == 1 { -v } else { v })
        }
        Dist::Heaviside { at } => {
            let (_, hi) = phi.support().unwrap_or((Rational::zero(), Rational::zero()));
            Value::exact(if *at >= hi { Rational::zero() } else { phi.integrate(at, &hi)? })
        }
        Dist::Density(f) => Value::exact(f.mul(phi).integral()?),
        Dist::PrincipalValue => pv_integral(phi, tol)?,
        Dist::Derivative(n, inner) if **inner == Dist::PrincipalValue => {
            let g = weak_derivative(phi, *n, &t.to_string())?;
            let v = pv_integral(&g, tol).map_err(|e| match e {
                Error::NotSmoothAt { point, .. } => Error::NotSmoothAt { atom: t.to_string(), point, order: *n as u32 },
                e => e,
            })?;
            if n % 2 == 1 {
                v.scale(&-Rational::one())
            } else {
                v
            }
        }
        other => return pair(other, phi, tol),
    })
}

/// `w(x) · (p.v. 1/x ⋆ k)(x)`, evaluated pointwise by enclosure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvTerm {
    pub kernel: PiecewisePoly,
    pub weight: PiecewisePoly,
}

impl PvTerm {
    pub fn new(kernel: PiecewisePoly) -> Self {
        Self { kernel, weight: PiecewisePoly::constant(Rational::one()) }
    }

    /// `w(x) ⟨p.v. 1/y, k(x - y)⟩`.
    pub fn eval(&self, x: &Rational, tol: &Rational) -> Result<Value> {
        let w = self.weight.eval(x);
        if w.is_zero() {
            return Ok(Value::exact(Rational::zero()));
        }
        let shifted = self.kernel.affine(&-Rational::one(), x)?;
        Ok(pv_integral(&shifted, &(tol / w.abs()))?.scale(&w))
    }

    /// `∫ w (p.v. 1/x ⋆ k) φ = ⟨p.v. 1/x, ǩ ⋆ (w φ)⟩`.
    pub fn pair(&self, phi: &PiecewisePoly, tol: &Rational) -> Result<Value> {
        let wphi = self.weight.mul(phi);
        if wphi.is_zero() {
            return Ok(Value::exact(Rational::zero()));
        }
        pv_integral(&self.kernel.reflect().convolve(&wphi)?, tol)
    }
}

/// A function `smooth + Σ pv terms`: the shape of `T ⋆ φ` for the supported atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularized {
    pub smooth: PiecewisePoly,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pv: Vec<PvTerm>,
}

impl Regularized {
    pub fn smooth(f: PiecewisePoly) -> Self {
        Self { smooth: f, pv: Vec::new() }
    }

    pub fn zero() -> Self {
        Self::smooth(PiecewisePoly::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.pv.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.smooth.is_zero() && self.pv.is_empty()
    }

    pub fn eval(&self, x: &Rational, tol: &Rational) -> Result<Value> {
        let n = int(self.pv.len().max(1) as i64);
        let mut acc = Value::exact(self.smooth.eval(x));
        for t in &self.pv {
            acc = acc + t.eval(x, &(tol / &n))?;
        }
        Ok(acc)
    }

    /// `∫ self · φ` for compactly supported `φ`.
    pub fn pair(&self, phi: &PiecewisePoly, tol: &Rational) -> Result<Value> {
        require_compact(phi)?;
        let n = int(self.pv.len().max(1) as i64);
        let mut acc = Value::exact(self.smooth.mul(phi).integral()?);
        for t in &self.pv {
            acc = acc + t.pair(phi, &(tol / &n))?;
        }
        Ok(acc)
    }

    /// Sum with pv terms of equal kernel merged and zero weights dropped.
    pub fn add(&self, other: &Self) -> Self {
        let mut pv: Vec<PvTerm> = Vec::new();
        for t in self.pv.iter().chain(&other.pv) {
            match pv.iter_mut().find(|u| u.kernel == t.kernel) {
                Some(u) => u.weight = u.weight.add(&t.weight),
                None => pv.push(t.clone()),
            }
        }
        pv.retain(|t| !t.weight.is_zero() && !t.kernel.is_zero());
        Self { smooth: self.smooth.add(&other.smooth), pv }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.mul_smooth(&PiecewisePoly::constant(c.clone()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    fn mul_smooth(&self, g: &PiecewisePoly) -> Self {
        let pv = self.pv.iter().map(|t| PvTerm { kernel: t.kernel.clone(), weight: t.weight.mul(g) }).collect();
        Self::smooth(self.smooth.mul(g)).add(&Self { smooth: PiecewisePoly::zero(), pv })
    }

    /// Pointwise product; two principal-value factors cannot be multiplied in closed form.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !self.pv.is_empty() && !other.pv.is_empty() {
            return Err(Error::Unsupported("product of two principal-value representatives".into()));
        }
        if self.pv.is_empty() {
            Ok(other.mul_smooth(&self.smooth))
        } else {
            Ok(self.mul_smooth(&other.smooth))
        }
    }

    /// Classical derivative: `(w (pv ⋆ k))' = w' (pv ⋆ k) + w (pv ⋆ k')`.
    pub fn derivative(&self) -> Result<Self> {
        let mut out = Self::smooth(self.smooth.derivative()?);
        for t in &self.pv {
            let a = PvTerm { kernel: t.kernel.clone(), weight: t.weight.derivative()? };
            let b = PvTerm { kernel: weak_derivative(&t.kernel, 1, "pv1x")?, weight: t.weight.clone() };
            out = out.add(&Self { smooth: PiecewisePoly::zero(), pv: vec![a, b] });
        }
        Ok(out)
    }
}

/// `(T ⋆ φ)(x) = ⟨T(y), φ(x - y)⟩`.
pub fn convolve_with_test(t: &Dist, phi: &PiecewisePoly) -> Result<Regularized> {
    require_compact(phi)?;
    let mut out = Regularized::zero();
    for (c, atom) in t.terms()? {
        let piece = match &atom {
            Dist::DeltaDeriv { order, at } => {
                let g = weak_derivative(phi, *order, &atom.to_string())?;
                Regularized::smooth(g.affine(&Rational::one(), at)?)
            }
            Dist::Heaviside { at } => Regularized::smooth(phi.antiderivative()?.affine(&Rational::one(), at)?),
            Dist::Density(f) => Regularized::smooth(f.convolve(phi)?),
            Dist::PrincipalValue => Regularized { smooth: PiecewisePoly::zero(), pv: vec![PvTerm::new(phi.clone())] },
            Dist::Derivative(n, _) => {
                let g = weak_derivative(phi, *n, &atom.to_string())?;
                Regularized { smooth: PiecewisePoly::zero(), pv: vec![PvTerm::new(g)] }
            }
            _ => unreachable!("terms() yields atoms only"),
        };
        out = out.add(&piece.scale(&c));
    }
    Ok(out)
}

/// `|⟨T, φ⟩| <= C Σ_{μ<=m} sup_G |φ^{(μ)}|` for every `φ` supported in `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormBound {
    #[serde(with = "rational_str")]
    pub constant: Rational,
    pub order: usize,
    #[serde(with = "rational_str")]
    pub lo: Rational,
    #[serde(with = "rational_str")]
    pub hi: Rational,
}

pub fn continuity_bound(t: &Dist, g: &Interval) -> Result<SeminormBound> {
    let (Some(lo), Some(hi)) = (g.lo.clone(), g.hi.clone()) else {
        return Err(Error::UnboundedRegion);
    };
    let (constant, order) = bound_of(t, &lo, &hi)?;
    Ok(SeminormBound { constant, order, lo, hi })
}

fn bound_of(t: &Dist, lo: &Rational, hi: &Rational) -> Result<(Rational, usize)> {
    Ok(match t {
        Dist::DeltaDeriv { order, .. } => (Rational::one(), *order),
        Dist::Heaviside { .. } => (hi - lo, 0),
        Dist::Density(f) => {
            let local = f.mul(&PiecewisePoly::indicator(lo.clone(), hi.clone())?);
            (local.l1_enclosure(&rpow(&int(2), -30))?.hi, 0)
        }
        Dist::PrincipalValue => {
            // |x| <= 1 part: 2 min(1, R) sup|φ'|; 1 < |x| <= R part: 2 ln R sup|φ|
            let r = lo.abs().max(hi.abs());
            let near = int(2) * r.clone().min(Rational::one());
            let far = if r > Rational::one() { ln_enclosure(&r, &rpow(&int(2), -30)).hi * int(2) } else { Rational::zero() };
            (near + far, 1)
        }
        Dist::Scale(c, inner) => {
            let (k, m) = bound_of(inner, lo, hi)?;
            (k * c.abs(), m)
        }
        Dist::Sum(a, b) => {
            let (ka, ma) = bound_of(a, lo, hi)?;
            let (kb, mb) = bound_of(b, lo, hi)?;
            (ka + kb, ma.max(mb))
        }
        Dist::Derivative(n, inner) => {
            let (k, m) = bound_of(inner, lo, hi)?;
            (k, m + n)
        }
    })
}

/// `Σ_{μ<=m} sup_{[lo,hi]} |φ^{(μ)}|` as an enclosure.
pub fn seminorm(phi: &PiecewisePoly, m: usize, lo: &Rational, hi: &Rational) -> Result<Enclosure> {
    let mut g = phi.clone();
    let mut acc = Enclosure::point(Rational::zero());
    for mu in 0..=m {
        if mu > 0 {
            g = weak_derivative(&g, 1, "seminorm")?;
        }
        acc = acc + g.sup_enclosure(lo, hi, &rpow(&int(2), -30))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn bump(m: usize) -> PiecewisePoly {
        // (1 - x²)^m on [-1, 1]
        let p = Polynomial::new(vec![int(1), int(0), int(-1)]).pow(m);
        PiecewisePoly::on_interval(p, int(-1), int(1)).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_distribution("delta").unwrap(), Dist::delta(int(0)));
        assert_eq!(parse_distribution("D^1(heaviside)").unwrap(), Dist::delta(int(0)));
        let d = parse_distribution("2*delta + D^2(heaviside@1)").unwrap();
        let want = Dist::delta(int(0)).scale(int(2)).plus(Dist::DeltaDeriv { order: 1, at: int(1) });
        assert_eq!(d, want);
        assert!(matches!(parse_distribution("gamma"), Err(Error::UnknownAtom(_))));
        assert!(matches!(parse_distribution("2*(delta"), Err(Error::Parse { .. })));
        assert!(matches!(parse_distribution("delta +"), Err(Error::Parse { .. })));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "delta",
            "delta^(3)@-1/2",
            "3/2*heaviside@2 - 2*pv1x",
            "D^2(pv1x) + poly:1,0,-1@[-1,1]",
            "poly:1,2@[0,inf] - D(poly:1@[-2,3])",
            "-delta@1/3 + 0.5*D^2(delta)",
        ] {
            let d = parse_distribution(s).unwrap();
            let again = parse_distribution(&d.to_string()).unwrap();
            assert_eq!(d, again, "{s} -> {d}");
        }
    }

    #[test]
    fn delta_pairings() {
        let phi = bump(3).affine(&int(1), &rat(1, 3)).unwrap();
        let tol = rpow(&int(2), -30);
        let d0 = pair(&Dist::delta(int(0)), &phi, &tol).unwrap();
        assert_eq!(d0, Value::exact(phi.eval(&int(0))));
        let d1 = pair(&parse_distribution("delta^(1)").unwrap(), &phi, &tol).unwrap();
        assert_eq!(d1, Value::exact(-phi.piecewise_derivative().eval(&int(0))));
        let rough = bump(1);
        assert!(matches!(pair(&parse_distribution("delta^(1)@1").unwrap(), &rough, &tol), Err(Error::NotSmoothAt { .. })));
    }

    #[test]
    fn pv_cancellation() {
        // x ψ(x) with ψ the normalized bump: ⟨p.v. 1/x, xψ⟩ = ∫ψ = 1
        let psi = bump(4);
        let psi = psi.scale(&psi.integral().unwrap().recip());
        let phi = psi.mul_poly(&Polynomial::x());
        let tol = rpow(&int(2), -40);
        let v = pair(&Dist::PrincipalValue, &phi, &tol).unwrap();
        assert!(v.to_enclosure().contains(&int(1)));
        assert!(v.width() <= tol);
    }

    #[test]
    fn pv_of_even_function_is_zero_and_shift_is_log() {
        let tol = rpow(&int(2), -40);
        assert_eq!(pair(&Dist::PrincipalValue, &bump(2), &tol).unwrap(), Value::exact(int(0)));
        // ∫_1^2 dx/x = ln 2
        let ind = PiecewisePoly::indicator(int(1), int(2)).unwrap();
        let v = pair(&Dist::PrincipalValue, &ind, &tol).unwrap().to_enclosure();
        assert!(v.lo < rat(6932, 10000) && v.hi > rat(6931, 10000));
        assert!(v.width() <= tol);
    }

    #[test]
    fn heaviside_convolution_is_a_ramp() {
        let d = bump(3).affine(&rat(1, 8), &int(0)).unwrap();
        let d = d.scale(&d.integral().unwrap().recip());
        let r = convolve_with_test(&Dist::heaviside(int(0)), &d).unwrap();
        assert!(r.is_exact());
        assert!(r.smooth.eval(&rat(1, 8)).is_one());
        assert!(r.smooth.eval(&rat(5, 4)).is_one());
        assert!(r.smooth.eval(&rat(-1, 8)).is_zero());
        assert_eq!(r.smooth.eval(&int(0)), rat(1, 2));
        let x = rat(1, 20);
        assert_eq!(r.smooth.eval(&x), d.integrate(&rat(-1, 8), &x).unwrap());
    }

    #[test]
    fn second_derivative_of_abs_is_two_delta() {
        let abs = PiecewisePoly::on_interval(-Polynomial::x(), int(-1), int(0))
            .unwrap()
            .add(&PiecewisePoly::on_interval(Polynomial::x(), int(0), int(1)).unwrap());
        let t = Dist::Density(abs).derivative(2);
        let phi = bump(3).affine(&rat(1, 2), &rat(1, 5)).unwrap();
        let tol = rpow(&int(2), -30);
        assert_eq!(pair(&t, &phi, &tol).unwrap(), Value::exact(int(2) * phi.eval(&int(0))));
    }

    #[test]
    fn continuity_examples() {
        let g = Interval::bounded(int(-1), int(1)).unwrap();
        let b = continuity_bound(&parse_distribution("delta^(1)").unwrap(), &g).unwrap();
        assert_eq!((b.constant, b.order), (int(1), 1));
        let g = Interval::bounded(int(-2), int(2)).unwrap();
        let b = continuity_bound(&Dist::heaviside(int(0)), &g).unwrap();
        assert_eq!((b.constant, b.order), (int(4), 0));
        let open = Interval::new(None, Some(int(1))).unwrap();
        assert!(matches!(continuity_bound(&Dist::PrincipalValue, &open), Err(Error::UnboundedRegion)));
    }
}
