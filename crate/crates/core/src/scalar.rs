//! Scalar abstraction shared by the polynomial, piecewise and series code.
//!
//! Everything exact in this crate runs over [`Rational`]; the same generic
//! code also accepts `f64`/`f32` for quick numerical sketches and
//! [`Complex`] coefficients where a field of complex scalars is needed.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Field-like scalar: exact rationals, IEEE floats, or complex numbers over either.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }
}

/// Totally ordered scalar.
pub trait RealScalar: Scalar + PartialOrd + Signed {
    fn to_f64(&self) -> f64;

    fn half(&self) -> Self {
        self.clone() / Self::from_i64(2)
    }
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl RealScalar for Rational {
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
}

impl RealScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q) as f32
    }
}

impl RealScalar for f32 {
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl<T: Scalar> Scalar for Complex<T> {
    fn from_rational(q: &Rational) -> Self {
        Complex::new(T::from_rational(q), T::zero())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^exp` for a signed integer exponent.
pub fn rpow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Converts huge or tiny rationals without overflowing to inf/0 prematurely.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            let v = n / d;
            if v != 0.0 && v.is_finite() {
                return v;
            }
        }
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs_f64(q).exp()
}

fn bigint_log2_parts(n: &BigInt) -> (f64, i64) {
    // n = mantissa * 2^shift with mantissa below 2^64
    let bits = n.bits() as i64;
    let shift = (bits - 64).max(0);
    let top = (n.magnitude() >> shift as usize).to_f64().unwrap_or(f64::MAX);
    (top, shift)
}

/// Natural log of |q| in double precision, robust for numerators and
/// denominators far outside the f64 exponent range.
pub fn ln_abs_f64(q: &Rational) -> f64 {
    let (nm, ns) = bigint_log2_parts(q.numer());
    let (dm, ds) = bigint_log2_parts(q.denom());
    nm.ln() - dm.ln() + (ns - ds) as f64 * std::f64::consts::LN_2
}

/// Exact `n`-th root of a rational if it exists (real root; negative values only for odd `n`).
pub fn rational_root(q: &Rational, n: u32) -> Option<Rational> {
    if n == 0 {
        return None;
    }
    if n == 1 || q.is_zero() {
        return Some(q.clone());
    }
    if q.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return rational_root(&-q, n).map(|r| -r);
    }
    let nr = q.numer().nth_root(n);
    let dr = q.denom().nth_root(n);
    if num_traits::pow(nr.clone(), n as usize) == *q.numer() && num_traits::pow(dr.clone(), n as usize) == *q.denom() {
        Some(Rational::new(nr, dr))
    } else {
        None
    }
}

/// `base^(p/q)` when the result is rational.
pub fn rational_power(base: &Rational, exp: &Rational) -> Option<Rational> {
    let q = exp.denom().to_u32()?;
    let p = exp.numer().to_i64()?;
    let root = rational_root(base, q)?;
    if root.is_zero() && p < 0 {
        return None;
    }
    Some(rpow(&root, p))
}

/// Parses `p/q`, integers, decimals (`0.125`) and powers (`2^-3`, `1/2^4`).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = || Error::Parse { pos: 0, msg: format!("not a rational number: {text:?}") };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = split_top_slash(s) {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d.is_zero() {
            return Err(Error::Parse { pos: 0, msg: format!("zero denominator in {text:?}") });
        }
        return Ok(n / d);
    }
    if let Some((base, exp)) = s.split_once('^') {
        let b = parse_rational(base)?;
        let e: i64 = exp.trim().trim_start_matches('(').trim_end_matches(')').parse().map_err(|_| err())?;
        if b.is_zero() && e < 0 {
            return Err(err());
        }
        return Ok(rpow(&b, e));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim().trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) || !ip.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| err())? };
        let frac: BigInt = if fp.is_empty() { BigInt::zero() } else { fp.parse().map_err(|_| err())? };
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

fn split_top_slash(s: &str) -> Option<(&str, &str)> {
    s.find('/').map(|i| (&s[..i], &s[i + 1..]))
}

/// Floor of a rational as a big integer.
pub fn floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// Largest dyadic rational `<= q` with the given number of fractional bits.
pub fn dyadic_floor(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    Rational::new(floor(&(q * Rational::from_integer(scale.clone()))), scale)
}

/// Smallest dyadic rational `>= q` with the given number of fractional bits.
pub fn dyadic_ceil(q: &Rational, bits: u32) -> Rational {
    -dyadic_floor(&-q, bits)
}

pub fn is_positive(q: &Rational) -> bool {
    q.numer().sign() == Sign::Plus
}

pub fn abs_max<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Rational {
    Rational::from_integer((1..=n as u64).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// The rational `s` with `a = b^s`, if one with a small denominator exists.
///
/// Both arguments must be positive and `b != 1`. The candidate comes from a
/// float estimate; the identity `a^q = b^p` is then checked exactly.
pub fn exact_log_ratio(a: &Rational, b: &Rational) -> Option<Rational> {
    if !a.is_positive() || !b.is_positive() || b.is_one() {
        return None;
    }
    let est = ln_abs_f64(a) / ln_abs_f64(b);
    if !est.is_finite() || est.abs() > 1e6 {
        return None;
    }
    // continued-fraction convergents of the estimate
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = est;
    for _ in 0..12 {
        let t = x.floor();
        let ti = t as i64;
        let h = ti.checked_mul(h1)?.checked_add(h0)?;
        let k = ti.checked_mul(k1)?.checked_add(k0)?;
        if k > 64 {
            break;
        }
        let s = Rational::new(h.into(), k.into());
        if rpow(a, s.denom().to_i64()?) == rpow(b, s.numer().to_i64()?) {
            return Some(s);
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = x - t;
        if frac.abs() < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}
