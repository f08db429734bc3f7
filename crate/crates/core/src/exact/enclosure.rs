//! Rational interval enclosures, and a rigorous enclosure of the natural log.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::io::rational_str;
use crate::scalar::{dyadic_ceil, dyadic_floor, rational_to_f64, Rational};

/// Closed interval `[lo, hi]` with rational endpoints known to contain a real value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    #[serde(with = "rational_str")]
    pub lo: Rational,
    #[serde(with = "rational_str")]
    pub hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        Self { lo: q.clone(), hi: q }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo <= *q && *q <= self.hi
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if c.is_negative() {
            Self::new(b, a)
        } else {
            Self::new(a, b)
        }
    }

    /// Enclosure of `|x|`.
    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            Self::new(Rational::zero(), self.lo.abs().max(self.hi.abs()))
        }
    }

    pub fn mid_f64(&self) -> f64 {
        rational_to_f64(&self.mid())
    }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: Self) -> Self {
        Enclosure::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: Self) -> Self {
        Enclosure::new(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Self {
        Enclosure::new(-self.hi, -self.lo)
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: Self) -> Self {
        let c = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = c.iter().min().cloned().unwrap();
        let hi = c.iter().max().cloned().unwrap();
        Enclosure::new(lo, hi)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Result of a computation that is exact for most inputs but only enclosed for some.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Value {
    Exact {
        #[serde(with = "rational_str")]
        value: Rational,
    },
    Enclosure(Enclosure),
}

impl Value {
    pub fn exact(q: Rational) -> Self {
        Value::Exact { value: q }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact { value } => Some(value),
            Value::Enclosure(e) if e.is_point() => Some(&e.lo),
            Value::Enclosure(_) => None,
        }
    }

    pub fn to_enclosure(&self) -> Enclosure {
        match self {
            Value::Exact { value } => Enclosure::point(value.clone()),
            Value::Enclosure(e) => e.clone(),
        }
    }

    pub fn mid(&self) -> Rational {
        match self {
            Value::Exact { value } => value.clone(),
            Value::Enclosure(e) => e.mid(),
        }
    }

    pub fn width(&self) -> Rational {
        match self {
            Value::Exact { .. } => Rational::zero(),
            Value::Enclosure(e) => e.width(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Value {
        match self {
            Value::Exact { value } => Value::exact(value * c),
            Value::Enclosure(e) => Value::Enclosure(e.scale(c)),
        }
    }

    fn from_enclosure(e: Enclosure) -> Value {
        if e.is_point() {
            Value::exact(e.lo)
        } else {
            Value::Enclosure(e)
        }
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Exact { value: a }, Value::Exact { value: b }) => Value::exact(a + b),
            (a, b) => Value::from_enclosure(a.to_enclosure() + b.to_enclosure()),
        }
    }
}

impl Sub for Value {
    type Output = Value;
    fn sub(self, rhs: Value) -> Value {
        self + rhs.scale(&-Rational::one())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact { value } => write!(f, "{value}"),
            Value::Enclosure(e) => write!(f, "{e} (enclosure, width {})", e.width()),
        }
    }
}

/// Enclosure of `atanh(t) = sum t^(2j+1)/(2j+1)` for `0 <= t <= 1/3`, width at most `tol`.
fn atanh_enclosure(t: &Rational, tol: &Rational) -> Enclosure {
    let t2 = t * t;
    let mut power = t.clone();
    let mut sum = Rational::zero();
    let mut j: i64 = 0;
    let one = Rational::one();
    loop {
        let denom = Rational::from_integer(BigInt::from(2 * j + 1));
        sum += &power / &denom;
        power *= &t2;
        // Remaining terms are bounded by the geometric tail t^(2j+3) / ((2j+3)(1-t^2)).
        let tail = &power / (Rational::from_integer(BigInt::from(2 * j + 3)) * (&one - &t2));
        if tail <= tol / Rational::from_integer(2.into()) || power.is_zero() {
            return Enclosure::new(sum.clone(), sum + tail);
        }
        j += 1;
    }
}

/// Rigorous rational enclosure of `ln(q)` for `q > 0` with width at most `tol`.
///
/// Uses `q = 2^k m` with `m` in `[1, 2)`, `ln m = 2 atanh((m-1)/(m+1))` and
/// `ln 2 = 2 atanh(1/3)`; endpoints are rounded outward to dyadic rationals so
/// their size stays bounded.
pub fn ln_enclosure(q: &Rational, tol: &Rational) -> Enclosure {
    assert!(q.is_positive(), "ln of a non-positive rational");
    assert!(tol.is_positive(), "enclosure tolerance must be positive");
    if q.is_one() {
        return Enclosure::point(Rational::zero());
    }
    let k = q.numer().bits() as i64 - q.denom().bits() as i64;
    let two = Rational::from_integer(2.into());
    let mut m = q * crate::scalar::rpow(&two, -k);
    let mut k = k;
    while m >= two {
        m /= &two;
        k += 1;
    }
    while m < Rational::one() {
        m *= &two;
        k -= 1;
    }
    let budget = tol / Rational::from_integer(BigInt::from(4 * (k.unsigned_abs() + 1)));
    let t = (&m - Rational::one()) / (&m + Rational::one());
    let ln_m = atanh_enclosure(&t, &budget).scale(&two);
    let ln2 = atanh_enclosure(&Rational::new(1.into(), 3.into()), &budget).scale(&two);
    let raw = ln2.scale(&Rational::from_integer(BigInt::from(k))) + ln_m;
    let bits = tol_bits(tol) + 8;
    Enclosure::new(dyadic_floor(&raw.lo, bits), dyadic_ceil(&raw.hi, bits))
}

fn tol_bits(tol: &Rational) -> u32 {
    let b = tol.denom().bits() as i64 - tol.numer().bits() as i64 + 2;
    b.clamp(8, 4096) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn ln_enclosures_contain_float_values() {
        let tol = rat(1, 1 << 30);
        for (n, d) in [(2, 1), (1, 2), (10, 1), (3, 7), (1, 4096), (12345, 17)] {
            let e = ln_enclosure(&rat(n, d), &tol);
            let f = (n as f64 / d as f64).ln();
            assert!(e.width() <= tol, "width for {n}/{d}");
            assert!(rational_to_f64(&e.lo) <= f + 1e-12 && f - 1e-12 <= rational_to_f64(&e.hi), "{n}/{d}: {e}");
        }
        assert_eq!(ln_enclosure(&int(1), &tol), Enclosure::point(int(0)));
    }

    #[test]
    fn ln_is_additive_within_enclosures() {
        let tol = rat(1, 1 << 20);
        let a = ln_enclosure(&int(3), &tol);
        let b = ln_enclosure(&int(5), &tol);
        let c = ln_enclosure(&int(15), &tol);
        let s = a + b;
        assert!(s.lo <= c.hi && c.lo <= s.hi);
    }

    #[test]
    fn interval_arithmetic() {
        let a = Enclosure::new(int(-1), int(2));
        let b = Enclosure::new(int(3), int(4));
        assert_eq!(a.clone() * b.clone(), Enclosure::new(int(-4), int(8)));
        assert_eq!(a.abs(), Enclosure::new(int(0), int(2)));
        assert_eq!((b - a).lo, int(1));
    }
}
