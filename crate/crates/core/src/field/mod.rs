//! Truncated series `Σ a_q ε^q + O(ε^T)` with rational exponents, the
//! computable model of the asymptotic-number field used throughout.
//!
//! The truncation order `T` is part of the value: every operation returns the
//! exact truncation its inputs determine, never more.

mod expr;
mod puiseux;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, rational_power, RealScalar, Rational, Scalar};

pub use expr::eval_expr;
pub use puiseux::{eval_poly, gaussian_roots, puiseux_roots, PuiseuxRoot};
pub use text::parse_series;

/// Default truncation order, `O(ε^8)`.
pub fn default_trunc() -> Rational {
    int(8)
}

/// Exponent of the lowest term; `Infinite` for the zero element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(q) => Some(q),
            Valuation::Infinite => None,
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite(q) => write!(f, "{q}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    terms: BTreeMap<Rational, C>,
    trunc: Rational,
}

impl<C: Scalar> Series<C> {
    /// Drops zero coefficients and every exponent at or above `trunc`.
    pub fn new(terms: impl IntoIterator<Item = (Rational, C)>, trunc: Rational) -> Self {
        let mut map = BTreeMap::new();
        for (q, c) in terms {
            if q >= trunc {
                continue;
            }
            let e = map.entry(q).or_insert_with(C::zero);
            *e = e.clone() + c;
        }
        map.retain(|_, c: &mut C| !c.is_zero());
        Self { terms: map, trunc }
    }

    pub fn zero(trunc: Rational) -> Self {
        Self { terms: BTreeMap::new(), trunc }
    }

    pub fn constant(c: C, trunc: Rational) -> Self {
        Self::new([(Rational::zero(), c)], trunc)
    }

    pub fn one(trunc: Rational) -> Self {
        Self::constant(C::one(), trunc)
    }

    /// `c ε^q`.
    pub fn monomial(c: C, q: Rational, trunc: Rational) -> Self {
        Self::new([(q, c)], trunc)
    }

    /// The infinitesimal `ε` itself.
    pub fn eps(trunc: Rational) -> Self {
        Self::monomial(C::one(), Rational::one(), trunc)
    }

    pub fn terms(&self) -> &BTreeMap<Rational, C> {
        &self.terms
    }

    pub fn trunc(&self) -> &Rational {
        &self.trunc
    }

    pub fn coeff(&self, q: &Rational) -> C {
        self.terms.get(q).cloned().unwrap_or_else(C::zero)
    }

    /// Zero up to the truncation order.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(q) => Valuation::Finite(q.clone()),
            None => Valuation::Infinite,
        }
    }

    /// Lowest exponent, or the truncation order for the zero element.
    fn order(&self) -> Rational {
        self.terms.keys().next().cloned().unwrap_or_else(|| self.trunc.clone())
    }

    pub fn leading(&self) -> Option<(&Rational, &C)> {
        self.terms.iter().next()
    }

    /// Same value known to a lower order; orders above the current one are ignored.
    pub fn truncate(&self, t: &Rational) -> Self {
        let t = if *t < self.trunc { t.clone() } else { self.trunc.clone() };
        Self::new(self.terms.clone(), t)
    }

    /// Replaces the truncation order outright, treating the stored terms as exact.
    pub fn with_trunc(&self, t: Rational) -> Self {
        Self::new(self.terms.clone(), t)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.terms.iter().map(|(q, a)| (q.clone(), a.clone() * c.clone())), self.trunc.clone())
    }

    /// Multiplication by `ε^q`.
    pub fn shift(&self, q: &Rational) -> Self {
        Self::new(self.terms.iter().map(|(e, a)| (e + q, a.clone())), &self.trunc + q)
    }

    pub fn inv(&self) -> Result<Self> {
        let Some((v, a0)) = self.leading() else {
            return Err(Error::DivisionByZero(self.trunc.to_string()));
        };
        let (v, a0inv) = (v.clone(), C::one() / a0.clone());
        // self = a0 ε^v (1 + t) with t of positive valuation, known to order trunc - v.
        let rel = &self.trunc - &v;
        let t = Self::new(
            self.terms.iter().skip(1).map(|(q, a)| (q - &v, a.clone() * a0inv.clone())),
            rel.clone(),
        );
        let mut sum = Self::one(rel.clone());
        if let Some(step) = t.terms.keys().next().cloned() {
            let mut power = Self::one(rel.clone());
            let neg_t = -&t;
            let mut n = Rational::zero();
            while n < rel {
                power = &power * &neg_t;
                sum = &sum + &power;
                n += &step;
            }
        }
        Ok(sum.scale(&a0inv).shift(&-v))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n == 0 {
            return Ok(Self::one(self.trunc.clone()));
        }
        let base = if n < 0 { self.inv()? } else { self.clone() };
        Ok((1..n.unsigned_abs()).fold(base.clone(), |acc, _| &acc * &base))
    }

    /// Value at a concrete rational `ε`, exact only when every `ε^q` is rational.
    pub fn eval_at(&self, epsilon: &Rational) -> Result<C> {
        let mut acc = C::zero();
        for (q, c) in &self.terms {
            let p = rational_power(epsilon, q)
                .ok_or_else(|| Error::IrrationalPower { exponent: q.to_string(), epsilon: epsilon.to_string() })?;
            acc = acc + c.clone() * C::from_rational(&p);
        }
        Ok(acc)
    }
}

impl<C: RealScalar> Series<C> {
    /// Sign of the lowest nonzero term; zero up to truncation compares equal.
    pub fn signum(&self) -> Ordering {
        match self.leading() {
            None => Ordering::Equal,
            Some((_, c)) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    pub fn cmp_series(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Series<Complex<Rational>> {
    pub fn from_real(r: &Series<Rational>) -> Self {
        Self::new(r.terms.iter().map(|(q, c)| (q.clone(), Complex::new(c.clone(), Rational::zero()))), r.trunc.clone())
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// Real part; errors unless the imaginary part vanishes.
    pub fn to_real(&self) -> Result<Series<Rational>> {
        if !self.is_real() {
            return Err(Error::NotOrdered);
        }
        Ok(Series::new(self.terms.iter().map(|(q, c)| (q.clone(), c.re.clone())), self.trunc.clone()))
    }

    /// Order on real elements: sign of the leading coefficient of `self - other`.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(self.to_real()?.cmp_series(&other.to_real()?))
    }

    pub fn real_constant(c: Rational, trunc: Rational) -> Self {
        Self::constant(Complex::new(c, Rational::zero()), trunc)
    }
}

impl<'a, C: Scalar> Add<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn add(self, rhs: &Series<C>) -> Series<C> {
        let trunc = self.trunc.clone().min(rhs.trunc.clone());
        Series::new(self.terms.iter().chain(&rhs.terms).map(|(q, c)| (q.clone(), c.clone())), trunc)
    }
}

impl<'a, C: Scalar> Sub<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn sub(self, rhs: &Series<C>) -> Series<C> {
        self + &(-rhs)
    }
}

impl<C: Scalar> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        Series { terms: self.terms.iter().map(|(q, c)| (q.clone(), -c.clone())).collect(), trunc: self.trunc.clone() }
    }
}

impl<'a, C: Scalar> Mul<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn mul(self, rhs: &Series<C>) -> Series<C> {
        // (a + O(ε^ta)) (b + O(ε^tb)) is known to order min(ta + vb, tb + va).
        let trunc = (&self.trunc + rhs.order()).min(&rhs.trunc + self.order());
        let mut out: BTreeMap<Rational, C> = BTreeMap::new();
        for (qa, a) in &self.terms {
            for (qb, b) in &rhs.terms {
                let q = qa + qb;
                if q >= trunc {
                    break;
                }
                let e = out.entry(q).or_insert_with(C::zero);
                *e = e.clone() + a.clone() * b.clone();
            }
        }
        Series::new(out, trunc)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<C: Scalar> $tr for Series<C> {
            type Output = Series<C>;
            fn $m(self, rhs: Self) -> Series<C> {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl<C: Scalar> Neg for Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        -&self
    }
}
