//! Real-root isolation for univariate polynomials.
//!
//! Descartes' rule of signs on the Möbius-transformed polynomial decides
//! whether an open interval holds zero, one, or possibly several roots;
//! intervals with more are bisected. The input is reduced to its
//! square-free part first so every root is simple and the recursion ends.

use num_traits::One;

use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Rational};

/// Default refinement width for isolating intervals, `2^-40`.
pub fn default_width() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::one() << 40)
}

/// Closed interval `[lo, hi]` holding exactly one root; `lo == hi` for an exact rational root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: RealScalar> RootInterval<T> {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> T {
        (self.lo.clone() + self.hi.clone()).half()
    }
}

/// Upper bound on the number of roots in the open interval `(a, b)`; exact when 0 or 1.
pub fn descartes_bound<T: RealScalar>(p: &Polynomial<T>, a: &T, b: &T) -> usize {
    let Some(n) = p.degree() else { return 0 };
    let unit = p.compose_affine(&(b.clone() - a.clone()), a);
    // x^n * unit(1/x) shifted by one maps (0, inf) onto (0, 1).
    let mut rev = unit.coeffs().to_vec();
    rev.resize(n + 1, T::zero());
    rev.reverse();
    let q = Polynomial::new(rev).taylor_shift(&T::one());
    sign_variations(q.coeffs())
}

fn sign_variations<T: RealScalar>(coeffs: &[T]) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        let pos = c.is_positive();
        if let Some(l) = last {
            if l != pos {
                count += 1;
            }
        }
        last = Some(pos);
    }
    count
}

/// Isolates every real root of `p` in the closed interval `[lo, hi]` into
/// disjoint intervals no wider than `width`, sorted left to right.
pub fn isolate_real_roots<T: RealScalar>(p: &Polynomial<T>, lo: &T, hi: &T, width: &T) -> Result<Vec<RootInterval<T>>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if lo > hi {
        return Err(Error::InvalidInterval { lo: format!("{lo:?}"), hi: format!("{hi:?}") });
    }
    let q = p.squarefree();
    let mut out = Vec::new();
    if q.eval(lo).is_zero() {
        out.push(RootInterval { lo: lo.clone(), hi: lo.clone() });
    }
    if lo == hi {
        return Ok(out);
    }
    isolate_open(&q, lo.clone(), hi.clone(), width, &mut out);
    if q.eval(hi).is_zero() {
        out.push(RootInterval { lo: hi.clone(), hi: hi.clone() });
    }
    Ok(out)
}

fn isolate_open<T: RealScalar>(q: &Polynomial<T>, a: T, b: T, width: &T, out: &mut Vec<RootInterval<T>>) {
    match descartes_bound(q, &a, &b) {
        0 => {}
        1 => out.push(refine(q, RootInterval { lo: a, hi: b }, width)),
        _ => {
            let m = (a.clone() + b.clone()).half();
            isolate_open(q, a, m.clone(), width, out);
            if q.eval(&m).is_zero() {
                out.push(RootInterval { lo: m.clone(), hi: m.clone() });
            }
            isolate_open(q, m, b, width, out);
        }
    }
}

/// Bisects an isolating interval of a square-free `q` until it is at most `width` wide.
pub fn refine<T: RealScalar>(q: &Polynomial<T>, mut iv: RootInterval<T>, width: &T) -> RootInterval<T> {
    while !iv.is_exact() && iv.width() > *width {
        iv = bisect_once(q, iv);
    }
    iv
}

/// One bisection step on an isolating interval.
pub fn bisect_once<T: RealScalar>(q: &Polynomial<T>, iv: RootInterval<T>) -> RootInterval<T> {
    if iv.is_exact() {
        return iv;
    }
    let m = iv.midpoint();
    let fm = q.eval(&m);
    if fm.is_zero() {
        return RootInterval { lo: m.clone(), hi: m };
    }
    let fa = q.eval(&iv.lo);
    let fb = q.eval(&iv.hi);
    let left = if !fa.is_zero() && !fb.is_zero() {
        fa.is_positive() != fm.is_positive()
    } else {
        descartes_bound(q, &iv.lo, &m) == 1
    };
    if left {
        RootInterval { lo: iv.lo, hi: m }
    } else {
        RootInterval { lo: m, hi: iv.hi }
    }
}

/// Cauchy bound: every root has absolute value below `1 + max |a_i / a_n|`.
pub fn cauchy_bound<T: RealScalar>(p: &Polynomial<T>) -> T {
    let Some(lead) = p.leading() else { return T::zero() };
    let n = p.coeffs().len() - 1;
    let max = p.coeffs()[..n]
        .iter()
        .map(|c| (c.clone() / lead.clone()).abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    T::one() + max
}
