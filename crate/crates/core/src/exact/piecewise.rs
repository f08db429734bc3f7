//! Piecewise polynomials with polynomial tails.
//!
//! A function is stored as knots `b_0 < ... < b_{n-1}` and `n + 1` pieces:
//! `pieces[0]` on `(-inf, b_0)`, `pieces[i]` on `[b_{i-1}, b_i)`, and
//! `pieces[n]` on `[b_{n-1}, inf)`. Compactly supported functions have zero
//! tails; nonzero tails let ramps such as `H * D` and global polynomials stay
//! exact. Adjacent equal pieces are always merged, so equality of values is
//! equality of functions.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::enclosure::Enclosure;
use super::poly::Polynomial;
use super::roots::{bisect_once, cauchy_bound, isolate_real_roots, RootInterval};
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise<T> {
    knots: Vec<T>,
    polys: Vec<Polynomial<T>>,
}

/// Which binary pointwise operation `combine` applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Mul,
}

/// `|f|` together with a bound on the error any integral of it can carry.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsResult<T> {
    pub shape: Piecewise<T>,
    /// Bound on `|∫ shape - ∫ |f||`; zero when every sign change is rational.
    pub error_bound: T,
}

fn merge_sorted<T: RealScalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
                Ordering::Less => {
                    i += 1;
                    x
                }
                Ordering::Greater => {
                    j += 1;
                    y
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(x), None) => {
                i += 1;
                x
            }
            (None, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(next) {
            out.push(next.clone());
        }
    }
    out
}

fn sort_dedup<T: RealScalar>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v.dedup();
    v
}

fn pmax<T: RealScalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Sum of `|c_j| h^j` over the Taylor coefficients of `p` at `c`, skipping the first `from` terms.
fn taylor_radius<T: RealScalar>(p: &Polynomial<T>, c: &T, h: &T, from: usize) -> T {
    let t = p.taylor_shift(c);
    let mut acc = T::zero();
    let mut hp = T::one();
    for (j, cj) in t.coeffs().iter().enumerate() {
        if j >= from {
            acc = acc + cj.abs() * hp.clone();
        }
        hp = hp * h.clone();
    }
    acc
}

/// Sign of `p` just to the right or left of `x`.
fn side_sign<T: RealScalar>(p: &Polynomial<T>, x: &T, right: bool) -> i32 {
    let t = p.taylor_shift(x);
    for (j, c) in t.coeffs().iter().enumerate() {
        if !c.is_zero() {
            let s = if c.is_positive() { 1 } else { -1 };
            return if right || j % 2 == 0 { s } else { -s };
        }
    }
    0
}

impl<T: RealScalar> Piecewise<T> {
    /// Builds from raw knots and `knots.len() + 1` pieces (tails included).
    pub fn from_parts(knots: Vec<T>, polys: Vec<Polynomial<T>>) -> Result<Self> {
        if polys.len() != knots.len() + 1 {
            return Err(Error::Domain(format!("{} knots need {} pieces, got {}", knots.len(), knots.len() + 1, polys.len())));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        Ok(Self::canonical(knots, polys))
    }

    /// Compactly supported function: `pieces[i]` on `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
    pub fn compact(breakpoints: Vec<T>, pieces: Vec<Polynomial<T>>) -> Result<Self> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::Domain(format!("{} breakpoints need {} pieces, got {}", breakpoints.len(), breakpoints.len().saturating_sub(1), pieces.len())));
        }
        let mut polys = Vec::with_capacity(pieces.len() + 2);
        polys.push(Polynomial::zero());
        polys.extend(pieces);
        polys.push(Polynomial::zero());
        Self::from_parts(breakpoints, polys)
    }

    fn canonical(knots: Vec<T>, polys: Vec<Polynomial<T>>) -> Self {
        let mut it = polys.into_iter();
        let mut np = vec![it.next().expect("at least one piece")];
        let mut nk = Vec::with_capacity(knots.len());
        for (k, p) in knots.into_iter().zip(it) {
            if np.last() != Some(&p) {
                nk.push(k);
                np.push(p);
            }
        }
        Self { knots: nk, polys: np }
    }

    pub fn zero() -> Self {
        Self { knots: Vec::new(), polys: vec![Polynomial::zero()] }
    }

    /// A polynomial on the whole line.
    pub fn global(p: Polynomial<T>) -> Self {
        Self { knots: Vec::new(), polys: vec![p] }
    }

    pub fn constant(c: T) -> Self {
        Self::global(Polynomial::constant(c))
    }

    /// `p` on `[a, b)`, zero elsewhere.
    pub fn on_interval(p: Polynomial<T>, a: T, b: T) -> Result<Self> {
        match a.partial_cmp(&b) {
            Some(Ordering::Less) => Self::compact(vec![a, b], vec![p]),
            Some(Ordering::Equal) => Ok(Self::zero()),
            _ => Err(Error::InvalidInterval { lo: format!("{a:?}"), hi: format!("{b:?}") }),
        }
    }

    pub fn indicator(a: T, b: T) -> Result<Self> {
        Self::on_interval(Polynomial::one(), a, b)
    }

    /// Indicator of `[a, inf)`.
    pub fn step(a: T) -> Self {
        Self::canonical(vec![a], vec![Polynomial::zero(), Polynomial::one()])
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// All pieces, left tail first and right tail last.
    pub fn polys(&self) -> &[Polynomial<T>] {
        &self.polys
    }

    pub fn left_tail(&self) -> &Polynomial<T> {
        &self.polys[0]
    }

    pub fn right_tail(&self) -> &Polynomial<T> {
        self.polys.last().expect("at least one piece")
    }

    pub fn is_zero(&self) -> bool {
        self.knots.is_empty() && self.polys[0].is_zero()
    }

    pub fn is_compact(&self) -> bool {
        self.left_tail().is_zero() && self.right_tail().is_zero()
    }

    /// Breakpoints of a compactly supported function (empty for zero).
    pub fn breakpoints(&self) -> &[T] {
        &self.knots
    }

    /// Interior pieces between the first and last breakpoints.
    pub fn pieces(&self) -> &[Polynomial<T>] {
        if self.knots.is_empty() {
            &[]
        } else {
            &self.polys[1..self.polys.len() - 1]
        }
    }

    /// `[first, last]` breakpoint for compact nonzero functions.
    pub fn support(&self) -> Option<(T, T)> {
        if !self.is_compact() || self.is_zero() {
            return None;
        }
        Some((self.knots[0].clone(), self.knots.last().unwrap().clone()))
    }

    /// Bounds of piece `i`; `None` stands for an infinite end.
    pub fn piece_bounds(&self, i: usize) -> (Option<&T>, Option<&T>) {
        let lo = if i == 0 { None } else { self.knots.get(i - 1) };
        (lo, self.knots.get(i))
    }

    fn piece_index(&self, x: &T) -> usize {
        self.knots.partition_point(|k| k <= x)
    }

    /// Value at `x`, right-continuous at knots.
    pub fn eval(&self, x: &T) -> T {
        self.polys[self.piece_index(x)].eval(x)
    }

    /// Left limit at `x`.
    pub fn eval_left(&self, x: &T) -> T {
        self.polys[self.knots.partition_point(|k| k < x)].eval(x)
    }

    /// Pieces over a refinement of the knot set.
    fn polys_on(&self, knots: &[T]) -> Vec<Polynomial<T>> {
        let mut out = Vec::with_capacity(knots.len() + 1);
        out.push(self.polys[0].clone());
        for k in knots {
            out.push(self.polys[self.piece_index(k)].clone());
        }
        out
    }

    pub fn combine(&self, other: &Self, op: CombineOp) -> Self {
        let knots = merge_sorted(&self.knots, &other.knots);
        let a = self.polys_on(&knots);
        let b = other.polys_on(&knots);
        let polys = a
            .iter()
            .zip(&b)
            .map(|(p, q)| match op {
                CombineOp::Add => p + q,
                CombineOp::Mul => p * q,
            })
            .collect();
        Self::canonical(knots, polys)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, CombineOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, CombineOp::Mul)
    }

    pub fn neg(&self) -> Self {
        Self { knots: self.knots.clone(), polys: self.polys.iter().map(|p| -p).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::canonical(self.knots.clone(), self.polys.iter().map(|p| p.scale(c)).collect())
    }

    pub fn mul_poly(&self, q: &Polynomial<T>) -> Self {
        Self::canonical(self.knots.clone(), self.polys.iter().map(|p| p * q).collect())
    }

    /// `x -> f((x - shift) / scale)`.
    pub fn affine(&self, scale: &T, shift: &T) -> Result<Self> {
        if scale.is_zero() {
            return Err(Error::DegenerateScale);
        }
        let inv = T::one() / scale.clone();
        let off = -(shift.clone() * inv.clone());
        let mut knots: Vec<T> = self.knots.iter().map(|k| scale.clone() * k.clone() + shift.clone()).collect();
        let mut polys: Vec<Polynomial<T>> = self.polys.iter().map(|p| p.compose_affine(&inv, &off)).collect();
        if scale.is_negative() {
            knots.reverse();
            polys.reverse();
        }
        Ok(Self::canonical(knots, polys))
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Self {
        self.affine(&-T::one(), &T::zero()).expect("nonzero scale")
    }

    /// Restriction to `[a, b)`.
    pub fn restrict(&self, a: &T, b: &T) -> Result<Self> {
        Ok(self.mul(&Self::indicator(a.clone(), b.clone())?))
    }

    /// Exact `∫_a^b f`.
    pub fn integrate(&self, a: &T, b: &T) -> Result<T> {
        if a > b {
            return Err(Error::InvalidInterval { lo: format!("{a:?}"), hi: format!("{b:?}") });
        }
        let mut acc = T::zero();
        for (i, p) in self.polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (lo, hi) = self.piece_bounds(i);
            let lo = match lo {
                Some(l) if l > a => l.clone(),
                _ => a.clone(),
            };
            let hi = match hi {
                Some(h) if h < b => h.clone(),
                _ => b.clone(),
            };
            if lo < hi {
                let ap = p.antiderivative();
                acc = acc + ap.eval(&hi) - ap.eval(&lo);
            }
        }
        Ok(acc)
    }

    /// `∫ f` over the line; requires compact support.
    pub fn integral(&self) -> Result<T> {
        match self.support() {
            Some((a, b)) => self.integrate(&a, &b),
            None if self.is_zero() => Ok(T::zero()),
            None => Err(Error::NotCompact),
        }
    }

    /// `∫ x^i f(x) dx`.
    pub fn moment(&self, i: usize) -> Result<T> {
        self.mul_poly(&Polynomial::monomial(T::one(), i)).integral()
    }

    /// Antiderivative `F(x) = ∫_{-inf}^x f`; requires a zero left tail.
    pub fn antiderivative(&self) -> Result<Self> {
        if !self.left_tail().is_zero() {
            return Err(Error::NotCompact);
        }
        let mut polys = Vec::with_capacity(self.polys.len());
        polys.push(Polynomial::zero());
        let mut acc = T::zero();
        for (i, p) in self.polys.iter().enumerate().skip(1) {
            let start = self.knots[i - 1].clone();
            let ap = p.antiderivative();
            let shift = acc.clone() - ap.eval(&start);
            let piece = &ap + &Polynomial::constant(shift);
            if let Some(end) = self.knots.get(i) {
                acc = piece.eval(end);
            }
            polys.push(piece);
        }
        Ok(Self::canonical(self.knots.clone(), polys))
    }

    /// Jumps `f(b+) - f(b-)` at the knots where `f` is discontinuous.
    pub fn jumps(&self) -> Vec<(T, T)> {
        self.knots
            .iter()
            .enumerate()
            .filter_map(|(i, k)| {
                let j = self.polys[i + 1].eval(k) - self.polys[i].eval(k);
                (!j.is_zero()).then(|| (k.clone(), j))
            })
            .collect()
    }

    /// Order of the lowest derivative that jumps at `x`; `None` when `f` is a single polynomial near `x`.
    pub fn smoothness_at(&self, x: &T) -> Option<usize> {
        let i = self.knots.iter().position(|k| k == x)?;
        let d = (&self.polys[i + 1] - &self.polys[i]).taylor_shift(x);
        d.coeffs().iter().position(|c| !c.is_zero())
    }

    /// Whether derivatives `0..=order` are continuous at `x`.
    pub fn is_smooth_at(&self, x: &T, order: usize) -> bool {
        self.smoothness_at(x).map_or(true, |j| j > order)
    }

    /// Piece-by-piece derivative with no continuity check.
    pub fn piecewise_derivative(&self) -> Self {
        Self::canonical(self.knots.clone(), self.polys.iter().map(Polynomial::derivative).collect())
    }

    /// Classical derivative. Needs `C^1` at interior breakpoints and continuity at
    /// the ends of the support; otherwise the derivative carries point masses and
    /// must go through the distribution calculus.
    pub fn derivative(&self) -> Result<Self> {
        let n = self.knots.len();
        for (i, k) in self.knots.iter().enumerate() {
            let end = self.is_compact() && (i == 0 || i + 1 == n);
            let need = if end { 0 } else { 1 };
            if !self.is_smooth_at(k, need) {
                return Err(Error::DistributionalDerivativeRequired { at: format!("{k:?}") });
            }
        }
        Ok(self.piecewise_derivative())
    }

    pub fn nth_derivative(&self, n: usize) -> Result<Self> {
        (0..n).try_fold(self.clone(), |f, _| f.derivative())
    }

    /// Exact convolution `(f * g)(x) = ∫ f(y) g(x - y) dy`; at least one factor must be compact.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let (f, g) = if self.is_compact() {
            (self, other)
        } else if other.is_compact() {
            (other, self)
        } else {
            return Err(Error::NotCompact);
        };
        let split;
        let g = if g.knots.is_empty() {
            // a global polynomial: give it a (redundant) knot so breakpoint sums exist
            split = Self { knots: vec![T::zero()], polys: vec![g.polys[0].clone(), g.polys[0].clone()] };
            &split
        } else {
            g
        };
        let mut sums = Vec::with_capacity(f.knots.len() * g.knots.len());
        for a in &f.knots {
            for c in &g.knots {
                sums.push(a.clone() + c.clone());
            }
        }
        let knots = sort_dedup(sums);
        let nk = knots.len();
        let samples: Vec<T> = (0..=nk)
            .map(|t| match t {
                0 => knots[0].clone() - T::one(),
                t if t == nk => knots[nk - 1].clone() + T::one(),
                t => (knots[t - 1].clone() + knots[t].clone()).half(),
            })
            .collect();
        let mut polys = vec![Polynomial::zero(); nk + 1];
        for (fi, p) in f.polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (Some(a), Some(b)) = f.piece_bounds(fi) else { unreachable!("compact factor has zero tails") };
            // A_i = antiderivative of y^i p(y).
            let mut anti = Vec::new();
            for (gi, q) in g.polys.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let deg = q.degree().unwrap_or(0);
                while anti.len() <= deg {
                    anti.push((&Polynomial::monomial(T::one(), anti.len()) * p).antiderivative());
                }
                // q(x - y) = sum_i r_i(x) y^i with r_i = (-1)^i q^(i) / i!
                let mut r = Vec::with_capacity(deg + 1);
                let mut dq = q.clone();
                let mut fact = T::one();
                for i in 0..=deg {
                    if i > 0 {
                        dq = dq.derivative();
                        fact = fact * T::from_i64(i as i64);
                    }
                    let s = if i % 2 == 0 { T::one() } else { -T::one() };
                    r.push(dq.scale(&(s / fact.clone())));
                }
                let (c, d) = g.piece_bounds(gi);
                let mut cache: Vec<((bool, bool), Polynomial<T>)> = Vec::new();
                for (t, s) in samples.iter().enumerate() {
                    let upper_moving = c.is_some_and(|c| s.clone() - c.clone() < *b);
                    let lower_moving = d.is_some_and(|d| s.clone() - d.clone() > *a);
                    let uval = if upper_moving { s.clone() - c.unwrap().clone() } else { b.clone() };
                    let lval = if lower_moving { s.clone() - d.unwrap().clone() } else { a.clone() };
                    if lval >= uval {
                        continue;
                    }
                    let key = (upper_moving, lower_moving);
                    let contrib = match cache.iter().find(|(k, _)| *k == key) {
                        Some((_, c)) => c.clone(),
                        None => {
                            let u = if upper_moving {
                                Polynomial::new(vec![-c.unwrap().clone(), T::one()])
                            } else {
                                Polynomial::constant(b.clone())
                            };
                            let l = if lower_moving {
                                Polynomial::new(vec![-d.unwrap().clone(), T::one()])
                            } else {
                                Polynomial::constant(a.clone())
                            };
                            let mut acc = Polynomial::zero();
                            for (i, ri) in r.iter().enumerate() {
                                let ai = &anti[i];
                                let diff = &compose_linear(ai, &u) - &compose_linear(ai, &l);
                                acc = &acc + &(ri * &diff);
                            }
                            cache.push((key, acc.clone()));
                            acc
                        }
                    };
                    polys[t] = &polys[t] + &contrib;
                }
            }
        }
        Ok(Self::canonical(knots, polys))
    }

    /// `|f|` with every rational sign change as a knot. Irrational sign changes are
    /// replaced by the midpoint of an isolating interval refined until the induced
    /// error on `∫|f|` is at most `tol` in total.
    pub fn abs(&self, tol: &T) -> AbsResult<T> {
        let mut segments: Vec<(Option<T>, Option<T>, &Polynomial<T>)> = Vec::new();
        for (i, p) in self.polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (lo, hi) = self.piece_bounds(i);
            let (lo, hi) = (lo.cloned(), hi.cloned());
            // Beyond the Cauchy bound a tail has constant sign.
            let r = cauchy_bound(p);
            let mut cuts = Vec::new();
            for x in [-r.clone(), r] {
                if lo.as_ref().map_or(true, |l| *l < x) && hi.as_ref().map_or(true, |h| x < *h) {
                    cuts.push(x);
                }
            }
            let mut start = lo;
            for c in cuts {
                segments.push((start, Some(c.clone()), p));
                start = Some(c);
            }
            segments.push((start, hi, p));
        }

        let mut pieces: Vec<(Option<T>, Option<T>, Polynomial<T>)> = Vec::new();
        // First pass: isolate and count irrational sign changes.
        let mut plans = Vec::new();
        for (lo, hi, p) in &segments {
            let (Some(l), Some(h)) = (lo, hi) else {
                let x = lo.clone().or_else(|| hi.clone()).unwrap_or_else(T::zero);
                let s = side_sign(p, &x, lo.is_some());
                plans.push((lo.clone(), hi.clone(), (*p).clone(), Vec::new(), s));
                continue;
            };
            let width = (h.clone() - l.clone()) / T::from_i64(1 << 20);
            let roots = isolate_real_roots(p, l, h, &width).expect("nonzero piece");
            let roots: Vec<_> = roots.into_iter().filter(|r| !(r.is_exact() && (r.lo == *l || r.lo == *h))).collect();
            plans.push((lo.clone(), hi.clone(), (*p).clone(), roots, side_sign(p, l, true)));
        }
        let irrational: usize = plans.iter().map(|pl| pl.3.iter().filter(|r| !r.is_exact()).count()).sum();
        let per_root = if irrational > 0 { tol.clone() / T::from_i64(irrational as i64) } else { tol.clone() };
        let mut error = T::zero();
        for (lo, hi, p, roots, first_sign) in plans {
            if roots.is_empty() {
                pieces.push((lo, hi, if first_sign < 0 { -&p } else { p }));
                continue;
            }
            let q = p.squarefree();
            let mut start = lo.clone();
            let mut sign = first_sign;
            for r in roots {
                let (cut, next_sign) = if r.is_exact() {
                    (r.lo.clone(), side_sign(&p, &r.lo, true))
                } else {
                    let mut iv = r;
                    loop {
                        let h = iv.width().half();
                        let bound = taylor_radius(&p, &iv.midpoint(), &h, 0) * iv.width() * T::from_i64(2);
                        if bound <= per_root || iv.is_exact() {
                            if !iv.is_exact() {
                                error = error + bound;
                            }
                            break;
                        }
                        iv = bisect_once(&q, iv);
                    }
                    let after = if p.eval(&iv.hi).is_zero() { side_sign(&p, &iv.hi, false) } else { side_sign(&p, &iv.hi, true) };
                    (iv.midpoint(), after)
                };
                pieces.push((start.clone(), Some(cut.clone()), if sign < 0 { -&p } else { p.clone() }));
                start = Some(cut);
                sign = next_sign;
            }
            pieces.push((start, hi, if sign < 0 { -&p } else { p.clone() }));
        }
        AbsResult { shape: Self::from_segments(pieces), error_bound: error }
    }

    /// Assembles consecutive `(lo, hi, poly)` segments with gaps filled by zero.
    fn from_segments(segments: Vec<(Option<T>, Option<T>, Polynomial<T>)>) -> Self {
        let mut knots: Vec<T> = Vec::new();
        let mut polys: Vec<Polynomial<T>> = vec![Polynomial::zero()];
        for (lo, hi, p) in segments {
            match lo {
                None => polys[0] = p,
                Some(l) => {
                    if knots.last() != Some(&l) {
                        knots.push(l);
                        polys.push(Polynomial::zero());
                    }
                    *polys.last_mut().unwrap() = p;
                }
            }
            if let Some(h) = hi {
                knots.push(h);
                polys.push(Polynomial::zero());
            }
        }
        Self::canonical(knots, polys)
    }

    /// Enclosure of `∫|f|` of width at most `tol`; the lower end never drops below `|∫ f|`.
    pub fn l1_norm(&self, tol: &T) -> Result<(T, T)> {
        if !self.is_compact() {
            return Err(Error::NotCompact);
        }
        let r = self.abs(tol);
        let i = r.shape.integral()?;
        let floor = self.integral()?.abs();
        let lo = pmax(i.clone() - r.error_bound.clone(), floor);
        Ok((lo, i + r.error_bound))
    }

    /// Enclosure of `sup |f|` over `[a, b]`. Critical points that are irrational
    /// are refined until the enclosure's slack is at most `rel_tol` times its lower end.
    pub fn sup_abs(&self, a: &T, b: &T, rel_tol: &T) -> Result<(T, T)> {
        if a > b {
            return Err(Error::InvalidInterval { lo: format!("{a:?}"), hi: format!("{b:?}") });
        }
        let mut exact = T::zero();
        let mut open: Vec<(Polynomial<T>, Polynomial<T>, RootInterval<T>)> = Vec::new();
        for (i, p) in self.polys.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let (lo, hi) = self.piece_bounds(i);
            let l = match lo {
                Some(l) if l > a => l.clone(),
                _ => a.clone(),
            };
            let h = match hi {
                Some(h) if h < b => h.clone(),
                _ => b.clone(),
            };
            if l > h || (l == h && hi.is_some_and(|x| *x == l)) {
                continue;
            }
            exact = pmax(exact, p.eval(&l).abs());
            exact = pmax(exact, p.eval(&h).abs());
            let dp = p.derivative();
            if dp.is_zero() || l == h {
                continue;
            }
            let q = dp.squarefree();
            let width = h.clone() - l.clone();
            for r in isolate_real_roots(&q, &l, &h, &width).expect("nonzero derivative") {
                if r.is_exact() {
                    exact = pmax(exact, p.eval(&r.lo).abs());
                } else {
                    open.push((p.clone(), q.clone(), r));
                }
            }
        }
        let mut lower = exact.clone();
        let stats = |open: &[(Polynomial<T>, Polynomial<T>, RootInterval<T>)]| -> Vec<(T, T)> {
            open.iter()
                .map(|(p, _, iv)| {
                    let c = iv.midpoint();
                    (p.eval(&c).abs(), taylor_radius(p, &c, &iv.width().half(), 1))
                })
                .collect()
        };
        for _round in 0..400 {
            let st = stats(&open);
            for (v, r) in &st {
                lower = pmax(lower, v.clone() - r.clone());
            }
            let target = rel_tol.clone() * lower.clone();
            let mut refined = false;
            for ((_, q, iv), (v, r)) in open.iter_mut().zip(&st) {
                // settled: cannot beat the current lower bound
                if !lower.is_zero() && v.clone() + r.clone() <= lower {
                    continue;
                }
                if *r > target && !iv.is_exact() {
                    *iv = bisect_once(q, iv.clone());
                    refined = true;
                }
            }
            if !refined {
                break;
            }
        }
        let st = stats(&open);
        for (v, r) in &st {
            lower = pmax(lower, v.clone() - r.clone());
        }
        let upper = st.into_iter().fold(pmax(exact, lower.clone()), |u, (v, r)| pmax(u, v + r));
        Ok((lower, upper))
    }
}

/// `a(u(x))` for a polynomial `u` of degree at most one.
fn compose_linear<T: RealScalar>(a: &Polynomial<T>, u: &Polynomial<T>) -> Polynomial<T> {
    a.compose_affine(&u.coeff(1), &u.coeff(0))
}

impl Piecewise<Rational> {
    /// Enclosure of `∫|f|` as an [`Enclosure`].
    pub fn l1_enclosure(&self, tol: &Rational) -> Result<Enclosure> {
        let (lo, hi) = self.l1_norm(tol)?;
        Ok(Enclosure::new(lo, hi))
    }

    pub fn sup_enclosure(&self, a: &Rational, b: &Rational, rel_tol: &Rational) -> Result<Enclosure> {
        let (lo, hi) = self.sup_abs(a, b, rel_tol)?;
        Ok(Enclosure::new(lo, hi))
    }
}

#[derive(Serialize, Deserialize)]
struct PiecewiseRecord {
    #[serde(with = "super::io::rational_vec")]
    breakpoints: Vec<Rational>,
    pieces: Vec<Coeffs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Coeffs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Coeffs>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Coeffs(#[serde(with = "super::io::rational_vec")] Vec<Rational>);

impl Serialize for Piecewise<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tail = |p: &Polynomial<Rational>| (!p.is_zero()).then(|| Coeffs(p.coeffs().to_vec()));
        let inner = if self.knots.is_empty() { &[][..] } else { &self.polys[1..self.polys.len() - 1] };
        PiecewiseRecord {
            breakpoints: self.knots.clone(),
            pieces: inner.iter().map(|p| Coeffs(p.coeffs().to_vec())).collect(),
            left: tail(self.left_tail()),
            right: tail(self.right_tail()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Piecewise<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PiecewiseRecord::deserialize(d)?;
        let to_poly = |c: Coeffs| Polynomial::new(c.0);
        let left = r.left.map(to_poly).unwrap_or_else(Polynomial::zero);
        let right = r.right.map(to_poly).unwrap_or_else(Polynomial::zero);
        if r.breakpoints.is_empty() {
            if !r.pieces.is_empty() || left != right {
                return Err(serde::de::Error::custom("pieces without breakpoints"));
            }
            return Ok(Self::global(left));
        }
        if r.pieces.len() + 1 != r.breakpoints.len() {
            return Err(serde::de::Error::custom("need exactly one piece per breakpoint interval"));
        }
        let mut polys = vec![left];
        polys.extend(r.pieces.into_iter().map(to_poly));
        polys.push(right);
        Self::from_parts(r.breakpoints, polys).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num_traits::Signed;

    type Pw = Piecewise<Rational>;
    type P = Polynomial<Rational>;

    fn p(v: &[i64]) -> P {
        Polynomial::new(v.iter().map(|&c| int(c)).collect())
    }

    fn bump() -> Pw {
        Pw::on_interval(p(&[1, 0, -1]), int(-1), int(1)).unwrap()
    }

    #[test]
    fn combine_identities() {
        let f = bump();
        assert_eq!(f.add(&Pw::zero()), f);
        let two = f.add(&f);
        assert_eq!(two.knots(), f.knots());
        assert_eq!(two, f.scale(&int(2)));
        let g = Pw::on_interval(p(&[1]), int(2), int(3)).unwrap();
        assert!(f.mul(&g).is_zero());
    }

    #[test]
    fn affine_rescales_support_and_mass() {
        let f = bump();
        assert_eq!(f.affine(&int(1), &int(0)).unwrap(), f);
        let s = f.affine(&rat(1, 10), &int(0)).unwrap();
        assert_eq!(s.support(), Some((rat(-1, 10), rat(1, 10))));
        assert_eq!(s.integral().unwrap(), rat(1, 10) * f.integral().unwrap());
        assert_eq!(f.affine(&int(0), &int(0)), Err(Error::DegenerateScale));
    }

    #[test]
    fn integrals() {
        assert_eq!(bump().integral().unwrap(), rat(4, 3));
        assert_eq!(Pw::zero().integral().unwrap(), int(0));
        assert_eq!(bump().integrate(&rat(1, 3), &rat(1, 3)).unwrap(), int(0));
        assert!(bump().integrate(&int(1), &int(0)).is_err());
        // tails integrate over finite windows
        assert_eq!(Pw::step(int(0)).integrate(&int(-5), &int(2)).unwrap(), int(2));
    }

    #[test]
    fn derivative_rules() {
        let c = Pw::on_interval(p(&[3]), int(0), int(1)).unwrap();
        assert!(matches!(c.derivative(), Err(Error::DistributionalDerivativeRequired { .. })));
        assert!(Pw::constant(int(3)).derivative().unwrap().is_zero());
        let b4 = Pw::on_interval(p(&[1, 0, -1]).pow(4), int(-1), int(1)).unwrap();
        let d = b4.derivative().unwrap();
        assert_eq!(d.eval(&int(0)), int(0));
        assert_eq!(d.integral().unwrap(), int(0));
        // a kink inside the support needs the distributional route
        let kink = Pw::compact(vec![int(-1), int(0), int(1)], vec![p(&[1, 1]), p(&[1, -1])]).unwrap();
        assert!(kink.derivative().is_err());
        assert_eq!(kink.piecewise_derivative().eval(&rat(1, 2)), int(-1));
    }

    #[test]
    fn indicator_convolution_is_hat() {
        let i = Pw::indicator(int(0), int(1)).unwrap();
        let hat = i.convolve(&i).unwrap();
        assert_eq!(hat.support(), Some((int(0), int(2))));
        assert_eq!(hat.eval(&int(1)), int(1));
        assert_eq!(hat.eval(&rat(1, 2)), rat(1, 2));
        assert_eq!(hat.eval(&rat(3, 2)), rat(1, 2));
        assert!(i.convolve(&Pw::zero()).unwrap().is_zero());
    }

    #[test]
    fn convolution_with_tails() {
        // H * indicator[0,1] is the ramp 0 .. 1 on [0,1], then 1.
        let ramp = Pw::step(int(0)).convolve(&Pw::indicator(int(0), int(1)).unwrap()).unwrap();
        assert_eq!(ramp.eval(&int(-3)), int(0));
        assert_eq!(ramp.eval(&rat(1, 4)), rat(1, 4));
        assert_eq!(ramp.eval(&int(7)), int(1));
        // polynomial * compact kernel: x * bump = (∫bump) x - ∫ y bump(y) dy
        let conv = Pw::global(p(&[0, 1])).convolve(&bump()).unwrap();
        assert_eq!(conv, Pw::global(Polynomial::new(vec![int(0), rat(4, 3)])));
        assert_eq!(Pw::step(int(0)).convolve(&Pw::step(int(0))), Err(Error::NotCompact));
    }

    #[test]
    fn abs_of_odd_function() {
        let f = Pw::on_interval(p(&[0, 1]), int(-1), int(1)).unwrap();
        let r = f.abs(&rat(1, 1000));
        assert_eq!(r.error_bound, int(0));
        assert_eq!(r.shape.integral().unwrap(), int(1));
        let b = bump();
        assert_eq!(b.abs(&rat(1, 10)).shape, b);
    }

    #[test]
    fn abs_with_irrational_roots_reports_error() {
        // x^2 - 1/2 on [-1, 1], against the closed form 2(s - 2s^3/3 - 1/6) with s = 1/√2
        let f = Pw::on_interval(Polynomial::new(vec![rat(-1, 2), int(0), int(1)]), int(-1), int(1)).unwrap();
        let tol = rat(1, 1 << 30);
        let (lo, hi) = f.l1_norm(&tol).unwrap();
        let s = (0.5f64).sqrt();
        let oracle = 2.0 * (s - 2.0 * s * s * s / 3.0 - 1.0 / 6.0);
        assert!(hi.clone() - lo.clone() <= tol * int(2));
        assert!(lo.to_f64() <= oracle + 1e-12 && oracle - 1e-12 <= hi.to_f64());
    }

    #[test]
    fn abs_handles_tails() {
        let f = Pw::global(p(&[-4, 0, 1]));
        let a = f.abs(&rat(1, 100)).shape;
        for x in [-10, -3, -2, -1, 0, 1, 2, 5] {
            assert_eq!(a.eval(&int(x)), f.eval(&int(x)).abs());
        }
    }

    #[test]
    fn sup_of_bump_derivative() {
        // (1-x^2)' = -2x on [-1,1]: sup 2 at the ends; (1-x^2)^2 has sup 1 at 0
        let b = bump();
        let d = b.piecewise_derivative();
        assert_eq!(d.sup_abs(&int(-2), &int(2), &rat(1, 1000)).unwrap(), (int(2), int(2)));
        let b2 = b.mul(&b);
        assert_eq!(b2.sup_abs(&int(-2), &int(2), &rat(1, 1000)).unwrap(), (int(1), int(1)));
        // x^3 - x on [-1,1]: max at 1/√3, value 2/(3√3)
        let f = Pw::on_interval(p(&[0, -1, 0, 1]), int(-1), int(1)).unwrap();
        let (lo, hi) = f.sup_abs(&int(-1), &int(1), &rat(1, 1 << 20)).unwrap();
        let v = 2.0 / (3.0 * 3f64.sqrt());
        assert!(lo.to_f64() <= v + 1e-12 && v - 1e-12 <= hi.to_f64());
        assert!((hi - lo) <= rat(1, 1 << 19));
    }

    #[test]
    fn json_round_trip() {
        let f = bump().add(&Pw::step(int(3)));
        let s = serde_json::to_string(&f).unwrap();
        let g: Pw = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let c = bump();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"breakpoints":["-1","1"],"pieces":[["1","0","-1"]]}"#);
    }

    #[test]
    fn antiderivative_matches_integrate() {
        let f = bump();
        let a = f.antiderivative().unwrap();
        for x in [rat(-1, 2), int(0), rat(2, 3), int(5)] {
            assert_eq!(a.eval(&x), f.integrate(&int(-1), &x.clone().max(int(-1))).unwrap());
        }
    }
}
