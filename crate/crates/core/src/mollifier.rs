//! Moment-vanishing mollifiers `φ(x) = Σ_j c_j ψ(x/ε^j)` built by an exact Vandermonde solve.
//!
//! `ψ = ψ_m` is the normalized polynomial bump `c_m (1 - x²)^m`. Because
//! `∫ x^i ψ(x/ε^j) dx = ε^{(i+1)j} ∫ y^i ψ(y) dy`, choosing `c` with
//! `Σ_j c_j ε^{(i+1)j} = [i = 0]` kills every moment of order `1..=k` for
//! any base bump, and the identities hold as exact rational zeros.

pub mod smooth;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::io::{rational_str, rational_vec};
use crate::exact::linalg::solve;
use crate::exact::{Enclosure, Polynomial};
use crate::expansion::measure_order;
use crate::scalar::{int, rat, rational_root, rpow, Rational};
use crate::PiecewisePoly;

/// Width used for L1 enclosures unless the caller asks otherwise.
pub fn default_l1_tol() -> Rational {
    rpow(&int(2), -40)
}

/// Smoothness parameter used when none is given: enough derivatives for stage-`k` audits.
pub fn default_m(k: usize) -> u32 {
    k as u32 + 3
}

/// `ψ_m(x) = c_m (1 - x²)^m` on `[-1, 1]` with `∫ψ_m = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseBump {
    pub m: u32,
    pub norm: Rational,
    pub shape: PiecewisePoly,
}

pub fn build_base(m: u32) -> Result<BaseBump> {
    if m == 0 {
        return Err(Error::InsufficientSmoothness("the base bump needs m >= 1".into()));
    }
    let one_minus_x2 = Polynomial::new(vec![int(1), int(0), int(-1)]);
    let raw = one_minus_x2.pow(m as usize);
    let anti = raw.antiderivative();
    let mass = anti.eval(&int(1)) - anti.eval(&int(-1));
    let norm = mass.recip();
    let shape = PiecewisePoly::on_interval(raw.scale(&norm), int(-1), int(1))?;
    Ok(BaseBump { m, norm, shape })
}

/// Exact solution of `Σ_j c_j ε^{(i+1)j} = [i = 0]`, `i = 0..=k`.
pub fn solve_vandermonde(k: usize, epsilon: &Rational) -> Result<Vec<Rational>> {
    if epsilon.is_one() {
        return Err(Error::SingularVandermonde);
    }
    if !epsilon.is_positive() || *epsilon > Rational::one() {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    let a: Vec<Vec<Rational>> = (0..=k).map(|i| (0..=k).map(|j| rpow(epsilon, ((i + 1) * j) as i64)).collect()).collect();
    let mut b = vec![Rational::zero(); k + 1];
    b[0] = Rational::one();
    solve(&a, &b).map_err(|_| Error::SingularVandermonde)
}

/// Rational `s <= 1/√d`, equal to it when `d` is a perfect square.
pub fn ball_scale(dim: usize) -> Rational {
    let d = int(dim as i64);
    if let Some(r) = rational_root(&d, 2) {
        return r.recip();
    }
    let bits = 20u32;
    let num = (BigInt::one() << (2 * bits as usize)) / BigInt::from(dim);
    Rational::new(num.sqrt(), BigInt::one() << bits as usize)
}

/// A stage-`k` mollifier. For `dim > 1` the function is the tensor product
/// `Π_i shape(x_i)`, where `shape` is the 1-d mollifier squeezed by
/// [`ball_scale`] so the support fits in the unit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollifier {
    pub k: usize,
    pub epsilon: Rational,
    pub coeffs: Vec<Rational>,
    pub base: BaseBump,
    pub dim: usize,
    pub scale: Rational,
    pub shape: PiecewisePoly,
}

pub fn build_mollifier(k: usize, epsilon: &Rational, base: &BaseBump, dim: usize) -> Result<Mollifier> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let coeffs = solve_vandermonde(k, epsilon)?;
    let mut phi = PiecewisePoly::zero();
    for (j, c) in coeffs.iter().enumerate() {
        let piece = base.shape.affine(&rpow(epsilon, j as i64), &Rational::zero())?.scale(c);
        phi = phi.add(&piece);
    }
    let scale = ball_scale(dim);
    let shape = if scale.is_one() { phi } else { phi.affine(&scale, &Rational::zero())?.scale(&scale.recip()) };
    let moll = Mollifier { k, epsilon: epsilon.clone(), coeffs, base: base.clone(), dim, scale, shape };
    moll.verify(k)?;
    Ok(moll)
}

impl Mollifier {
    pub fn m(&self) -> u32 {
        self.base.m
    }

    /// `∫ x^i shape(x) dx` for the 1-d factor.
    pub fn moment_1d(&self, i: usize) -> Rational {
        self.shape.moment(i).expect("compact")
    }

    /// `∫ x^α φ(x) dx` for a multi-index of length `dim`.
    pub fn moment(&self, alpha: &[usize]) -> Rational {
        assert_eq!(alpha.len(), self.dim, "multi-index length must equal the dimension");
        alpha.iter().map(|&a| self.moment_1d(a)).fold(Rational::one(), |acc, m| acc * m)
    }

    /// Checks `∫φ = 1` and every moment of total order `1..=k2` for `k2 <= k`.
    pub fn verify(&self, k2: usize) -> Result<()> {
        if k2 > self.k {
            return Err(Error::Domain(format!("stage {k2} exceeds the construction stage {}", self.k)));
        }
        let mass = self.moment(&vec![0; self.dim]);
        if !mass.is_one() {
            return Err(Error::Domain(format!("mass is {mass}, not 1")));
        }
        for alpha in multi_indices(self.dim, k2) {
            let total: usize = alpha.iter().sum();
            if total == 0 {
                continue;
            }
            let m = self.moment(&alpha);
            if !m.is_zero() {
                return Err(Error::Domain(format!("moment {alpha:?} is {m}, not 0")));
            }
        }
        Ok(())
    }

    /// Symmetry `φ(-x) = φ(x)`.
    pub fn is_symmetric(&self) -> bool {
        self.shape.reflect() == self.shape
    }

    /// Enclosure of `∫|φ|` of width at most `tol`.
    pub fn l1_norm(&self, tol: &Rational) -> Result<Enclosure> {
        if self.dim == 1 {
            return self.shape.l1_enclosure(tol);
        }
        let d = self.dim as u32;
        let mut t = tol / int(4 * self.dim as i64);
        loop {
            let e = self.shape.l1_enclosure(&t)?;
            let out = Enclosure::new(num_traits::pow(e.lo.clone(), d as usize), num_traits::pow(e.hi.clone(), d as usize));
            if out.width() <= *tol {
                return Ok(out);
            }
            t /= int(16);
        }
    }

    pub fn to_file(&self) -> MollifierFile {
        MollifierFile {
            k: self.k,
            m: self.m(),
            dim: self.dim,
            epsilon: self.epsilon.clone(),
            coeffs: self.coeffs.clone(),
            shape: self.shape.clone(),
        }
    }

    /// Rebuilds from a file record and checks that the stored data match.
    pub fn from_file(f: &MollifierFile) -> Result<Self> {
        let base = build_base(f.m)?;
        let moll = build_mollifier(f.k, &f.epsilon, &base, f.dim)?;
        if moll.coeffs != f.coeffs || moll.shape != f.shape {
            return Err(Error::Domain("stored coefficients or shape do not match a rebuild from k, m, dim, epsilon".into()));
        }
        Ok(moll)
    }
}

/// JSON form `{k, m, dim, epsilon, coeffs, shape}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierFile {
    pub k: usize,
    pub m: u32,
    pub dim: usize,
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    #[serde(with = "rational_vec")]
    pub coeffs: Vec<Rational>,
    pub shape: PiecewisePoly,
}

/// All multi-indices of length `dim` with total order at most `max`.
pub fn multi_indices(dim: usize, max: usize) -> Vec<Vec<usize>> {
    if dim == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=max {
        for mut rest in multi_indices(dim - 1, max - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn l1_norm(phi: &Mollifier, tol: &Rational) -> Result<Enclosure> {
    phi.l1_norm(tol)
}

/// Outcome of the lattice search in [`find_epsilon`].
#[derive(Clone, Debug)]
pub struct EpsilonSearch {
    pub epsilon: Rational,
    pub mollifier: Mollifier,
    pub l1: Enclosure,
    /// Every lattice point tried, with its L1 enclosure.
    pub trace: Vec<(Rational, Enclosure)>,
    /// Steps where halving ε raised the upper bound by more than the tolerance.
    pub monotone_violations: usize,
}

/// Largest `ε = 2^-t` whose mollifier has `∫|φ| <= 1 + δ`.
pub fn find_epsilon(k: usize, delta: &Rational, base: &BaseBump) -> Result<EpsilonSearch> {
    find_epsilon_with(k, delta, base, 1, &default_l1_tol())
}

pub fn find_epsilon_with(k: usize, delta: &Rational, base: &BaseBump, dim: usize, tol: &Rational) -> Result<EpsilonSearch> {
    if !delta.is_positive() {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    let target = Rational::one() + delta;
    let mut trace: Vec<(Rational, Enclosure)> = Vec::new();
    let mut violations = 0;
    let mut best: Option<(Rational, Rational)> = None;
    for t in 1..=64 {
        let eps = rpow(&rat(1, 2), t);
        let moll = build_mollifier(k, &eps, base, dim)?;
        let l1 = moll.l1_norm(tol)?;
        if let Some((_, prev)) = trace.last() {
            if l1.hi > &prev.hi + tol {
                violations += 1;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| l1.hi < *b) {
            best = Some((eps.clone(), l1.hi.clone()));
        }
        trace.push((eps.clone(), l1.clone()));
        if l1.hi <= target {
            return Ok(EpsilonSearch { epsilon: eps, mollifier: moll, l1, trace, monotone_violations: violations });
        }
    }
    let (e, b) = best.expect("at least one lattice point");
    Err(Error::SearchExhausted { best_epsilon: e.to_string(), best_bound: b.to_string() })
}

/// Predicted `α_0..α_k` and `β`.
pub fn predicted_exponents(k: usize) -> (Vec<i64>, i64) {
    let k = k as i64;
    let common: i64 = (1..k).map(|q| q * (k + 1 - q)).sum();
    let alpha = (0..=k).map(|j| common + (j..k).map(|m| k + 1 - m).sum::<i64>()).collect();
    (alpha, k + common)
}

/// `j + α_j - β = (k-j)(k-j+1)/2` for every `j` and `k + α_k - β = 0`.
pub fn exponent_identities_hold(k: usize) -> bool {
    let (alpha, beta) = predicted_exponents(k);
    let ki = k as i64;
    let each = alpha.iter().enumerate().all(|(j, a)| {
        let j = j as i64;
        2 * (j + a - beta) == (ki - j) * (ki - j + 1)
    });
    each && ki + alpha[k] - beta == 0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub k: usize,
    pub alpha: Vec<i64>,
    pub beta: i64,
    /// `α_j - β`, the predicted valuation of `c_j(ε)`.
    pub predicted: Vec<i64>,
    /// Log-log slopes of `|c_j(ε)|` on the ladder.
    pub measured: Vec<f64>,
    pub matches: Vec<bool>,
}

pub fn exponent_report(k: usize, ladder: &[Rational]) -> Result<ExponentReport> {
    if ladder.len() < 3 {
        return Err(Error::InvalidLadder(format!("{} points; at least 3 are needed", ladder.len())));
    }
    let mut sorted = ladder.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != ladder.len() || sorted.iter().any(|e| !e.is_positive() || *e >= Rational::one()) {
        return Err(Error::InvalidLadder("points must be distinct and in (0,1)".into()));
    }
    let (alpha, beta) = predicted_exponents(k);
    let coeffs: Vec<Vec<Rational>> = ladder.iter().map(|e| solve_vandermonde(k, e)).collect::<Result<_>>()?;
    let mut measured = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let samples: Vec<(Rational, Rational)> = ladder.iter().zip(&coeffs).map(|(e, c)| (e.clone(), c[j].abs())).collect();
        measured.push(measure_order(&samples)?.slope.unwrap_or(f64::INFINITY));
    }
    let predicted: Vec<i64> = alpha.iter().map(|a| a - beta).collect();
    let matches = predicted.iter().zip(&measured).map(|(p, m)| (m - *p as f64).abs() < 0.25).collect();
    Ok(ExponentReport { k, alpha, beta, predicted, measured, matches })
}

/// Stage-`k` moment table at a fixed `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpossibilityRow {
    pub k: usize,
    /// Order and value of the first nonzero moment.
    pub first_nonzero: (usize, Rational),
    /// Whether moments `1..=2k` all vanish (never expected).
    pub all_through_2k_vanish: bool,
}

/// For each `k`, the first moment the stage-`k` mollifier fails to kill.
pub fn standard_impossibility_check(k_list: &[usize], epsilon: &Rational, m: Option<u32>) -> Result<Vec<ImpossibilityRow>> {
    k_list
        .iter()
        .map(|&k| {
            let base = build_base(m.unwrap_or_else(|| default_m(k)))?;
            let moll = build_mollifier(k, epsilon, &base, 1)?;
            let mut first = None;
            for i in 1..=2 * k + 2 {
                let mi = moll.moment_1d(i);
                if !mi.is_zero() {
                    first = Some((i, mi));
                    break;
                }
            }
            let first = first.expect("a polynomial mollifier cannot kill every moment");
            let all = first.0 > 2 * k;
            Ok(ImpossibilityRow { k, first_nonzero: first, all_through_2k_vanish: all })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::factorial;

    #[test]
    fn base_normalization() {
        let b = build_base(1).unwrap();
        assert_eq!(b.norm, rat(3, 4));
        for m in 1..=10 {
            let b = build_base(m).unwrap();
            assert_eq!(b.shape.integral().unwrap(), int(1));
            assert_eq!(b.shape.reflect(), b.shape);
        }
        let b = build_base(3).unwrap();
        assert!(b.shape.eval(&int(1)).is_zero());
        assert!(b.shape.piecewise_derivative().eval_left(&int(1)).is_zero());
        assert!(matches!(build_base(0), Err(Error::InsufficientSmoothness(_))));
    }

    #[test]
    fn normalization_matches_beta_function_oracle() {
        // ∫(1-x²)^m = 2^{2m+1} (m!)² / (2m+1)!
        for m in 1..=8u32 {
            let mass = int(2).pow(2 * m as i32 + 1) * factorial(m) * factorial(m) / factorial(2 * m + 1);
            assert_eq!(build_base(m).unwrap().norm, mass.recip());
        }
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(solve_vandermonde(1, &rat(1, 10)).unwrap(), vec![rat(-1, 9), rat(100, 9)]);
        for k in 1..=6 {
            let e = rat(1, 10);
            let c = solve_vandermonde(k, &e).unwrap();
            let s: Rational = c.iter().enumerate().map(|(j, cj)| cj * rpow(&e, j as i64)).sum();
            assert_eq!(s, int(1));
        }
        assert_eq!(solve_vandermonde(2, &int(1)), Err(Error::SingularVandermonde));
        assert!(matches!(solve_vandermonde(2, &int(0)), Err(Error::Domain(_))));
        assert!(matches!(solve_vandermonde(2, &int(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn moments_vanish_exactly() {
        let base = build_base(6).unwrap();
        let m = build_mollifier(3, &rat(1, 16), &base, 1).unwrap();
        assert_eq!(m.moment_1d(0), int(1));
        for i in 1..=3 {
            assert!(m.moment_1d(i).is_zero());
        }
        assert!(m.is_symmetric());
        for k2 in 0..=3 {
            m.verify(k2).unwrap();
        }
    }

    #[test]
    fn tensor_product_moments() {
        let base = build_base(5).unwrap();
        let m = build_mollifier(2, &rat(1, 16), &base, 2).unwrap();
        assert_eq!(m.moment(&[1, 1]), int(0));
        assert_eq!(m.moment(&[0, 0]), int(1));
        let (lo, hi) = m.shape.support().unwrap();
        // s² + s² <= 1 for the corner of the support box
        assert!(&lo * &lo * int(2) <= int(1) && &hi * &hi * int(2) <= int(1));
    }

    #[test]
    fn l1_bounds() {
        let base = build_base(4).unwrap();
        let m = build_mollifier(1, &rat(1, 10), &base, 1).unwrap();
        let tol = rat(1, 1 << 20);
        let l1 = m.l1_norm(&tol).unwrap();
        assert!(l1.lo >= int(1) - &tol);
        assert!(l1.hi <= rat(11, 9) + &tol);
        assert!(l1.width() <= tol);
        assert_eq!(base.shape.l1_enclosure(&tol).unwrap(), Enclosure::point(int(1)));
    }

    #[test]
    fn epsilon_search() {
        let base = build_base(4).unwrap();
        let s = find_epsilon(1, &rat(1, 4), &base).unwrap();
        assert!(s.epsilon >= rat(1, 16));
        assert!(s.l1.hi <= rat(5, 4));
        let wide = find_epsilon(1, &int(3), &base).unwrap();
        assert_eq!(wide.epsilon, rat(1, 2));
        assert!(matches!(find_epsilon(1, &int(0), &base), Err(Error::Domain(_))));
    }

    #[test]
    fn exponent_law() {
        assert_eq!(predicted_exponents(2), (vec![7, 4, 2], 4));
        assert_eq!(predicted_exponents(1), (vec![2, 0], 1));
        for k in 1..=8 {
            assert!(exponent_identities_hold(k), "k = {k}");
        }
        let ladder: Vec<Rational> = (3..=12).map(|t| rpow(&rat(1, 2), t)).collect();
        let r = exponent_report(1, &ladder).unwrap();
        assert!(r.matches.iter().all(|&b| b));
        assert!((r.measured[0] - 1.0).abs() < 0.25 && (r.measured[1] + 1.0).abs() < 0.25);
        assert!(exponent_report(1, &ladder[..2]).is_err());
    }

    #[test]
    fn impossibility_table() {
        let rows = standard_impossibility_check(&[1, 2, 3], &rat(1, 16), None).unwrap();
        assert_eq!(rows[0].first_nonzero.0, 2);
        assert_eq!(rows[1].first_nonzero.0, 4);
        assert_eq!(rows[2].first_nonzero.0, 4);
        assert!(rows.iter().all(|r| !r.all_through_2k_vanish));
    }

    #[test]
    fn file_round_trip() {
        let base = build_base(4).unwrap();
        let m = build_mollifier(2, &rat(1, 16), &base, 1).unwrap();
        let json = serde_json::to_string(&m.to_file()).unwrap();
        let back: MollifierFile = serde_json::from_str(&json).unwrap();
        assert_eq!(Mollifier::from_file(&back).unwrap(), m);
    }
}
