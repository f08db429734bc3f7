//! Floating-point variant with the C^∞ bump `exp(-1/(1-x²))`.
//!
//! The bump has no rational moments, so everything here is quadrature with a
//! reported error estimate. Works for `f32` and `f64`.

use num_traits::Float;

use crate::error::Result;
use crate::exact::linalg::solve;
use crate::scalar::RealScalar;

/// Unnormalized `exp(-1/(1-x²))` on `(-1, 1)`.
pub fn bump<F: Float>(x: F) -> F {
    let one = F::one();
    if x.abs() >= one {
        return F::zero();
    }
    (-(one / (one - x * x))).exp()
}

/// Adaptive Simpson on `[a, b]`; returns the value and an error estimate.
pub fn integrate<F: Float, G: Fn(F) -> F>(f: &G, a: F, b: F, tol: F) -> (F, F) {
    let two = F::one() + F::one();
    let six = two * (two + F::one());
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / six * (fa + (two + two) * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Float, G: Fn(F) -> F>(f: &G, a: F, b: F, fa: F, fm: F, fb: F, whole: F, tol: F, depth: u32) -> (F, F) {
    let two = F::one() + F::one();
    let four = two + two;
    let six = four + two;
    let m = (a + b) / two;
    let (lm, rm) = ((a + m) / two, (m + b) / two);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    let fifteen = F::from(15.0).unwrap();
    if depth == 0 || delta.abs() <= fifteen * tol {
        return (left + right + delta / fifteen, delta.abs() / fifteen);
    }
    let (lv, le) = simpson(f, a, m, fa, flm, fm, left, tol / two, depth - 1);
    let (rv, re) = simpson(f, m, b, fm, frm, fb, right, tol / two, depth - 1);
    (lv + rv, le + re)
}

/// `φ(x) = Σ c_j ψ(x/ε^j)` with the normalized C^∞ bump `ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMollifier<F> {
    pub k: usize,
    pub epsilon: F,
    pub coeffs: Vec<F>,
    /// `1 / ∫ exp(-1/(1-x²)) dx`.
    pub norm: F,
    pub tol: F,
}

impl<F: Float + RealScalar> SmoothMollifier<F> {
    pub fn new(k: usize, epsilon: F, tol: F) -> Result<Self> {
        let n = k + 1;
        let a: Vec<Vec<F>> = (0..n).map(|i| (0..n).map(|j| epsilon.powi(((i + 1) * j) as i32)).collect()).collect();
        let mut b = vec![F::zero(); n];
        b[0] = F::one();
        let coeffs = solve(&a, &b)?;
        let (mass, _) = integrate(&bump, -F::one(), F::one(), tol);
        Ok(Self { k, epsilon, coeffs, norm: F::one() / mass, tol })
    }

    pub fn eval(&self, x: F) -> F {
        let mut acc = F::zero();
        let mut s = F::one();
        for c in &self.coeffs {
            acc = acc + *c * bump(x / s);
            s = s * self.epsilon;
        }
        acc * self.norm
    }

    /// Quadrature of `g(x) φ(x)`, split at the scale breakpoints `±ε^j`.
    fn integrate_against<G: Fn(F) -> F>(&self, g: G) -> (F, F) {
        let mut cuts: Vec<F> = vec![-F::one(), F::zero(), F::one()];
        let mut s = self.epsilon;
        for _ in 1..self.coeffs.len() {
            cuts.push(s);
            cuts.push(-s);
            s = s * self.epsilon;
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let f = |x: F| g(x) * self.eval(x);
        let pieces = F::from(cuts.len()).unwrap();
        cuts.windows(2).fold((F::zero(), F::zero()), |(v, e), w| {
            let (dv, de) = integrate(&f, w[0], w[1], self.tol / pieces);
            (v + dv, e + de)
        })
    }

    /// `∫ x^i φ` with an error estimate.
    pub fn moment(&self, i: usize) -> (F, F) {
        self.integrate_against(|x| x.powi(i as i32))
    }

    /// `∫ |φ|` with an error estimate.
    pub fn l1_norm(&self) -> (F, F) {
        let (v, e) = self.integrate_against(|x| if self.eval(x) < F::zero() { -F::one() } else { F::one() });
        (v, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_moments_vanish_numerically() {
        let m = SmoothMollifier::<f64>::new(2, 0.125, 1e-12).unwrap();
        let (mass, err) = m.moment(0);
        assert!((mass - 1.0).abs() < 1e-8 + err);
        for i in 1..=2 {
            assert!(m.moment(i).0.abs() < 1e-8, "moment {i}");
        }
        let (l1, _) = m.l1_norm();
        assert!(l1 >= 1.0 - 1e-8);
    }

    #[test]
    fn single_precision_runs() {
        let m = SmoothMollifier::<f32>::new(1, 0.25, 1e-6).unwrap();
        assert!((m.moment(0).0 - 1.0).abs() < 1e-3);
        assert!(m.moment(1).0.abs() < 1e-3);
    }
}
