//! Finite-stage asymptotic functions: ε-indexed representatives on a ladder,
//! the convolution embedding of distributions, growth classification and
//! pairings fitted to asymptotic numbers.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::delta::{build_cutoff, plateau, Cutoff, DeltaNet};
use crate::dist::{convolve_with_test, pair, weak_derivative, Dist, Regularized};
use crate::domain::{CompactWindow, Domain1D};
use crate::error::{Error, Result};
use crate::exact::io::rational_str;
use crate::exact::{Enclosure, Polynomial, Value};
use crate::expansion::{fit_expansion, ladder_ratio, measure_order, ExpansionFit, Grid, OrderEstimate};
use crate::mollifier::build_base;
use crate::scalar::{factorial, int, parse_rational, rpow, Rational};
use crate::{AsymptoticNumber, PiecewisePoly};

/// How a representative was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Distribution { expr: String, k: usize, m: u32 },
    Smooth { f: String },
    Null { order: i64 },
    Sum(Box<Provenance>, Box<Provenance>),
    Product(Box<Provenance>, Box<Provenance>),
    Scaled { factor: String, of: Box<Provenance> },
    Derivative { order: usize, of: Box<Provenance> },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Distribution { expr, k, m } => write!(f, "Σ({expr}) [k={k}, m={m}]"),
            Provenance::Smooth { f: g } => write!(f, "σ({g})"),
            Provenance::Null { order } => write!(f, "ε^{order}"),
            Provenance::Sum(a, b) => write!(f, "({a} + {b})"),
            Provenance::Product(a, b) => write!(f, "({a} · {b})"),
            Provenance::Scaled { factor, of } => write!(f, "({factor}) · {of}"),
            Provenance::Derivative { order, of } => write!(f, "∂^{order} {of}"),
        }
    }
}

/// An ε-indexed family of functions on `Ω`, one exact slice per ladder point.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative {
    pub ladder: Vec<Rational>,
    pub slices: Vec<Regularized>,
    pub provenance: Provenance,
    /// Moment order of the net; `None` for families that used no net.
    pub stage: Option<usize>,
    pub domain: Domain1D,
}

fn check_ladder(ladder: &[Rational]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidLadder("empty ladder".into()));
    }
    if let Some(e) = ladder.iter().find(|e| !e.is_positive() || **e >= Rational::one()) {
        return Err(Error::InvalidLadder(format!("{e} is not in (0,1)")));
    }
    Ok(())
}

fn min_stage(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn atom_support(t: &Dist) -> Option<(Rational, Rational)> {
    match t {
        Dist::DeltaDeriv { at, .. } => Some((at.clone(), at.clone())),
        Dist::Density(f) => f.support(),
        _ => None,
    }
}

/// One slice of `Σ(T)`: `((T Π_ε) ⋆ D_ε)`.
fn embed_slice(terms: &[(Rational, Dist)], domain: &Domain1D, net: &DeltaNet, eps: &Rational, largest: &Rational) -> Result<Regularized> {
    let d = net.instantiate(eps)?;
    let whole = domain.is_whole_line();
    let mut cutoff: Option<Cutoff> = None;
    let get_cutoff = |cutoff: &mut Option<Cutoff>| -> Result<Cutoff> {
        if cutoff.is_none() {
            *cutoff = Some(build_cutoff(domain, eps, net)?);
        }
        Ok(cutoff.clone().expect("just built"))
    };
    let mut out = Regularized::zero();
    for (c, atom) in terms {
        let piece = match atom {
            _ if whole => convolve_with_test(atom, &d)?,
            Dist::DeltaDeriv { at, .. } => {
                // Π ≡ 1 near the atom at the coarsest ε, hence at every finer one
                if !plateau(domain, largest).iter().any(|(l, h)| l <= at && at <= h) {
                    return Err(Error::BoundaryFlag { atom: atom.to_string(), epsilon: largest.to_string() });
                }
                convolve_with_test(atom, &d)?
            }
            Dist::Heaviside { at } => {
                let pi = get_cutoff(&mut cutoff)?;
                Regularized::smooth(pi.shape.mul(&PiecewisePoly::step(at.clone())).convolve(&d)?)
            }
            Dist::Density(f) => {
                let pi = get_cutoff(&mut cutoff)?;
                let windowed = match atom_support(atom) {
                    Some((a, b)) if pi.plateau_contains(&a, &b) => f.clone(),
                    _ => f.mul(&pi.shape),
                };
                Regularized::smooth(windowed.convolve(&d)?)
            }
            _ => return Err(Error::Unsupported(format!("{atom} can only be embedded on the whole line"))),
        };
        out = out.add(&piece.scale(c));
    }
    Ok(out)
}

/// `Σ_{D,Ω}(T)` on a ladder: slice `ε` is `((T Π_ε) ⋆ D_ε)`, with `Π` skipped on the whole line.
pub fn embed_distribution(t: &Dist, domain: &Domain1D, net: &DeltaNet, ladder: &[Rational]) -> Result<Representative> {
    check_ladder(ladder)?;
    if net.dim() != 1 {
        return Err(Error::Unsupported("representatives are one-dimensional".into()));
    }
    let terms = t.terms()?;
    let largest = ladder.iter().max().expect("nonempty").clone();
    let slices = ladder.iter().map(|e| embed_slice(&terms, domain, net, e, &largest)).collect::<Result<Vec<_>>>()?;
    Ok(Representative {
        ladder: ladder.to_vec(),
        slices,
        provenance: Provenance::Distribution { expr: t.canonical()?.to_string(), k: net.k(), m: net.base.m() },
        stage: Some(net.k()),
        domain: domain.clone(),
    })
}

/// `σ(f)`: the constant family `R_ε = f`.
pub fn embed_smooth(f: &PiecewisePoly, domain: &Domain1D, ladder: &[Rational]) -> Result<Representative> {
    check_ladder(ladder)?;
    Ok(Representative {
        ladder: ladder.to_vec(),
        slices: vec![Regularized::smooth(f.clone()); ladder.len()],
        provenance: Provenance::Smooth { f: Dist::Density(f.clone()).to_string() },
        stage: None,
        domain: domain.clone(),
    })
}

impl Representative {
    /// The family `ε^q` times the constant one; null at every order below `q`.
    pub fn monomial(q: i64, domain: &Domain1D, ladder: &[Rational]) -> Result<Self> {
        check_ladder(ladder)?;
        Ok(Self {
            ladder: ladder.to_vec(),
            slices: ladder.iter().map(|e| Regularized::smooth(PiecewisePoly::constant(rpow(e, q)))).collect(),
            provenance: Provenance::Null { order: q },
            stage: None,
            domain: domain.clone(),
        })
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.ladder != other.ladder {
            return Err(Error::LadderMismatch);
        }
        if self.domain != other.domain {
            return Err(Error::Domain(format!("domains differ: {} and {}", self.domain, other.domain)));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, prov: Provenance, f: impl Fn(&Regularized, &Regularized) -> Result<Regularized>) -> Result<Self> {
        self.compatible(other)?;
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        Ok(Self { ladder: self.ladder.clone(), slices, provenance: prov, stage: min_stage(self.stage, other.stage), domain: self.domain.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let prov = Provenance::Sum(Box::new(self.provenance.clone()), Box::new(other.provenance.clone()));
        self.zip(other, prov, |a, b| Ok(a.add(b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let prov = Provenance::Product(Box::new(self.provenance.clone()), Box::new(other.provenance.clone()));
        self.zip(other, prov, |a, b| a.mul(b))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            slices: self.slices.iter().map(|s| s.scale(c)).collect(),
            provenance: Provenance::Scaled { factor: c.to_string(), of: Box::new(self.provenance.clone()) },
            ..self.clone()
        }
    }

    /// Multiplies slice `ε` by the truncated value `c(ε)`, which must be real.
    pub fn scale_by(&self, c: &AsymptoticNumber) -> Result<Self> {
        let slices = self
            .ladder
            .iter()
            .zip(&self.slices)
            .map(|(e, s)| {
                let v = c.eval_at(e)?;
                if !v.im.is_zero() {
                    return Err(Error::NotReal);
                }
                Ok(s.scale(&v.re))
            })
            .collect::<Result<_>>()?;
        Ok(Self { slices, provenance: Provenance::Scaled { factor: c.to_string(), of: Box::new(self.provenance.clone()) }, ..self.clone() })
    }

    pub fn derivative(&self, n: usize) -> Result<Self> {
        let slices = self.slices.iter().map(|s| (0..n).try_fold(s.clone(), |acc, _| acc.derivative())).collect::<Result<_>>()?;
        Ok(Self { slices, provenance: Provenance::Derivative { order: n, of: Box::new(self.provenance.clone()) }, ..self.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(Regularized::is_zero)
    }

    /// Slicewise equality on `[lo, hi]`.
    pub fn agrees_on(&self, other: &Self, lo: &Rational, hi: &Rational) -> Result<bool> {
        self.compatible(other)?;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            let diff = a.sub(b);
            if !diff.pv.is_empty() || !diff.smooth.restrict(lo, hi)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eval(&self, slice: usize, x: &Rational, tol: &Rational) -> Result<Value> {
        self.slices[slice].eval(x, tol)
    }
}

/// Growth class of one derivative order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Growth {
    /// Observed decay at least `ε^order`; `None` means every slice vanishes on `K`.
    Null { order: Option<usize> },
    /// `sup ≲ ε^{-m}`.
    Moderate { m: i64 },
    /// No power law fits the sups.
    Neither,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Null { order: None } => write!(f, "null (exact zero)"),
            Growth::Null { order: Some(n) } => write!(f, "null (>= {n})"),
            Growth::Moderate { m } => write!(f, "moderate ({m})"),
            Growth::Neither => write!(f, "neither"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub alpha: usize,
    /// `sup_K |∂^α R_ε|` per ladder point.
    pub sups: Vec<Enclosure>,
    /// Set when a principal-value part forced sampling instead of a certified sup.
    pub sampled: bool,
    pub order: OrderEstimate,
    pub class: Growth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    #[serde(with = "rational_str")]
    pub window_lo: Rational,
    #[serde(with = "rational_str")]
    pub window_hi: Rational,
    pub alpha_max: usize,
    pub rows: Vec<GrowthRow>,
}

/// Log deviations above this mean the sups do not follow a power law.
const POWER_LAW_RESIDUAL: f64 = 0.1;

fn sup_on(slice: &Regularized, lo: &Rational, hi: &Rational) -> Result<(Enclosure, bool)> {
    let rel = rpow(&int(2), -30);
    if slice.pv.is_empty() {
        return Ok((slice.smooth.sup_enclosure(lo, hi, &rel)?, false));
    }
    let n = 64;
    let tol = rpow(&int(2), -30);
    let mut pts: Vec<Rational> = (0..=n).map(|i| lo + (hi - lo) * rat_frac(i, n)).collect();
    pts.extend(slice.smooth.knots().iter().filter(|k| lo <= *k && *k <= hi).cloned());
    let mut best = Enclosure::point(Rational::zero());
    for x in pts {
        let v = slice.eval(&x, &tol)?.to_enclosure().abs();
        if v.hi > best.hi {
            best = v;
        }
    }
    Ok((best, true))
}

fn rat_frac(i: i64, n: i64) -> Rational {
    Rational::new(i.into(), n.into())
}

/// Moderate/null classification of `∂^α R` on a compact window, `α <= alpha_max`.
pub fn classify(r: &Representative, window: &CompactWindow, alpha_max: usize, null_order: usize) -> Result<GrowthReport> {
    if r.ladder.len() < 4 || ladder_ratio(&r.ladder).is_none() {
        return Err(Error::InvalidLadder("classification needs a geometric ladder with at least 4 points".into()));
    }
    let mut rows = Vec::new();
    let mut current = r.clone();
    for alpha in 0..=alpha_max {
        if alpha > 0 {
            current = current.derivative(1)?;
        }
        let mut sups = Vec::new();
        let mut sampled = false;
        for s in &current.slices {
            let (e, flag) = sup_on(s, &window.lo, &window.hi)?;
            sampled |= flag;
            sups.push(e);
        }
        let samples: Vec<(Rational, Rational)> = r.ladder.iter().cloned().zip(sups.iter().map(Enclosure::mid)).collect();
        let order = measure_order(&samples)?;
        let class = match order.slope {
            None => Growth::Null { order: None },
            Some(s) if s >= null_order as f64 - 1e-9 => Growth::Null { order: Some(null_order) },
            Some(_) if order.residual > POWER_LAW_RESIDUAL => Growth::Neither,
            Some(s) => Growth::Moderate { m: (-s - 1e-9).ceil().max(0.0) as i64 },
        };
        rows.push(GrowthRow { alpha, sups, sampled, order, class });
    }
    Ok(GrowthReport { window_lo: window.lo.clone(), window_hi: window.hi.clone(), alpha_max, rows })
}

/// Pairing samples and the expansion fitted to them.
#[derive(Clone, Debug)]
pub struct PairingResult {
    pub samples: Vec<(Rational, Value)>,
    pub fit: ExpansionFit,
    pub number: AsymptoticNumber,
    /// Set when the residual is above tolerance, so the number is not a valid expansion.
    pub warning: Option<String>,
}

/// Requires `supp φ` inside the guaranteed plateau of `Π_ε` for every ladder point.
fn check_support(r: &Representative, phi: &PiecewisePoly) -> Result<()> {
    let Some((a, b)) = phi.support() else { return Ok(()) };
    for e in &r.ladder {
        if !plateau(&r.domain, e).iter().any(|(l, h)| *l <= a && b <= *h) {
            return Err(Error::SupportViolation { lo: a.to_string(), hi: b.to_string(), epsilon: e.to_string() });
        }
    }
    Ok(())
}

/// Exact slice pairings `∫ R_ε φ`.
pub fn pair_slices(r: &Representative, phi: &PiecewisePoly, tol: &Rational) -> Result<Vec<(Rational, Value)>> {
    if !phi.is_compact() {
        return Err(Error::NotCompact);
    }
    check_support(r, phi)?;
    r.ladder.iter().zip(&r.slices).map(|(e, s)| Ok((e.clone(), s.pair(phi, tol)?))).collect()
}

/// `⟨R, φ⟩` as an asymptotic number fitted on the declared grid.
pub fn rep_pair(r: &Representative, phi: &PiecewisePoly, grid: &Grid, trunc: &Rational, tol: &Rational) -> Result<PairingResult> {
    let enclosure_tol = rpow(&int(2), -40);
    let samples = pair_slices(r, phi, &enclosure_tol)?;
    let exps = grid.exponents(samples.len());
    let (fit, warning) = match fit_expansion(&samples, &exps, trunc, tol) {
        Ok(fit) => (fit, None),
        Err(Error::NoValidExpansion { residual, tolerance, fit }) => {
            (*fit, Some(format!("residual {residual} above tolerance {tolerance}; not classifiable on grid {grid}")))
        }
        Err(e) => return Err(e),
    };
    let number = fit.to_number();
    Ok(PairingResult { samples, fit, number, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationRow {
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    pub pairing: Value,
    pub error: Value,
}

/// `e(ε) = ⟨R_ε, φ⟩ - ⟨T, φ⟩` per slice and its decay order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub exact: Value,
    pub rows: Vec<PreservationRow>,
    pub order: OrderEstimate,
}

impl PreservationReport {
    pub fn all_zero(&self) -> bool {
        self.rows.iter().all(|r| r.error.as_exact().is_some_and(Zero::is_zero))
    }
}

pub fn check_pairing_preservation(t: &Dist, phi: &PiecewisePoly, domain: &Domain1D, net: &DeltaNet, ladder: &[Rational]) -> Result<PreservationReport> {
    let tol = rpow(&int(2), -40);
    let exact = pair(t, phi, &tol)?;
    let r = embed_distribution(t, domain, net, ladder)?;
    let rows: Vec<PreservationRow> = pair_slices(&r, phi, &tol)?
        .into_iter()
        .map(|(epsilon, pairing)| {
            let error = pairing.clone() - exact.clone();
            PreservationRow { epsilon, pairing, error }
        })
        .collect();
    let samples: Vec<(Rational, Rational)> = rows.iter().map(|r| (r.epsilon.clone(), r.error.mid())).collect();
    let order = measure_order(&samples)?;
    Ok(PreservationReport { exact, rows, order })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    /// `sup_K |f ⋆ D_ε - f|`.
    pub defect: Enclosure,
    /// `ε^{k+1}/(k+1)! · ∫|D_ε| · sup_{K±ε} |f^{(k+1)}|`.
    pub bound: Enclosure,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub k: usize,
    pub rows: Vec<ConsistencyRow>,
    pub order: OrderEstimate,
}

impl ConsistencyReport {
    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn exact_zero(&self) -> bool {
        self.rows.iter().all(|r| r.defect.hi.is_zero())
    }
}

/// Defect `σ(f) - Σ(L(f))` on `K` against the Taylor bound, slice by slice.
pub fn check_smooth_consistency(f: &PiecewisePoly, net: &DeltaNet, ladder: &[Rational], window: &CompactWindow) -> Result<ConsistencyReport> {
    check_ladder(ladder)?;
    let k = net.k();
    let largest = ladder.iter().max().expect("nonempty");
    let (reach_lo, reach_hi) = (&window.lo - largest, &window.hi + largest);
    if let Some(bad) = f.knots().iter().find(|x| reach_lo <= **x && **x <= reach_hi && !f.is_smooth_at(x, k + 1)) {
        return Err(Error::InsufficientSmoothness(format!("f is not C^{} at {bad}, within reach of the window", k + 1)));
    }
    let fk = weak_derivative(f, k + 1, "f").map_err(|e| Error::InsufficientSmoothness(e.to_string()))?;
    let rel = rpow(&int(2), -30);
    let l1_tol = rpow(&int(2), -40);
    let theta_l1 = net.base.shape.l1_enclosure(&l1_tol)?;
    let mut rows = Vec::new();
    for e in ladder {
        let d = net.instantiate(e)?;
        let g = f.convolve(&d)?.sub(f);
        let defect = g.sup_enclosure(&window.lo, &window.hi, &rel)?;
        let sup_fk = fk.sup_enclosure(&(&window.lo - e), &(&window.hi + e), &rel)?;
        let c = rpow(e, k as i64 + 1) / factorial(k as u32 + 1);
        let bound = (theta_l1.clone() * sup_fk).scale(&c);
        let holds = defect.hi <= bound.lo || defect.hi.is_zero();
        rows.push(ConsistencyRow { epsilon: e.clone(), defect, bound, holds });
    }
    let samples: Vec<(Rational, Rational)> = rows.iter().map(|r| (r.epsilon.clone(), r.defect.mid())).collect();
    let order = measure_order(&samples)?;
    Ok(ConsistencyReport { k, rows, order })
}

/// `⟨Σ(S)·Σ(T), φ⟩` as a fitted asymptotic number.
#[derive(Clone, Debug)]
pub struct ProductReport {
    pub lhs: String,
    pub rhs: String,
    pub pairing: PairingResult,
}

impl ProductReport {
    pub fn leading(&self) -> Option<(Rational, Rational)> {
        self.pairing.fit.leading().map(|t| (t.q.clone(), t.coeff.clone()))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn product_experiment(
    lhs: &Dist,
    rhs: &Dist,
    phi: &PiecewisePoly,
    domain: &Domain1D,
    net: &DeltaNet,
    ladder: &[Rational],
    grid: &Grid,
    trunc: &Rational,
    tol: &Rational,
) -> Result<ProductReport> {
    let a = embed_distribution(lhs, domain, net, ladder)?;
    let b = embed_distribution(rhs, domain, net, ladder)?;
    let pairing = rep_pair(&a.mul(&b)?, phi, grid, trunc, tol)?;
    Ok(ProductReport { lhs: lhs.to_string(), rhs: rhs.to_string(), pairing })
}

/// Smoothness of test-function bumps when none is given.
pub const DEFAULT_TEST_M: u32 = 3;

/// Test functions: `bump@a:r[:m]` is `ψ_m((x - a)/r)`, and
/// `poly:c0,c1,...@[a,b][:m]` is that polynomial times the bump fitted to `[a, b]`.
pub fn parse_test_function(text: &str) -> Result<PiecewisePoly> {
    let t = text.trim();
    let bad = |msg: &str| Error::Parse { pos: 0, msg: format!("{msg} in test function {t:?}") };
    if let Some(rest) = t.strip_prefix("bump@") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad("expected bump@a:r[:m]"));
        }
        let a = parse_rational(parts[0])?;
        let r = parse_rational(parts[1])?;
        if !r.is_positive() {
            return Err(bad("radius must be positive"));
        }
        let m = parts.get(2).map(|s| s.trim().parse::<u32>().map_err(|_| bad("bad smoothness"))).transpose()?.unwrap_or(DEFAULT_TEST_M);
        return build_base(m)?.shape.affine(&r, &a);
    }
    if let Some(rest) = t.strip_prefix("poly:") {
        let (coeffs, window) = rest.split_once("@[").ok_or_else(|| bad("expected poly:c0,...@[a,b]"))?;
        let (inner, tail) = window.split_once(']').ok_or_else(|| bad("missing ']'"))?;
        let (a, b) = inner.split_once(',').ok_or_else(|| bad("expected [a,b]"))?;
        let (a, b) = (parse_rational(a)?, parse_rational(b)?);
        if a >= b {
            return Err(Error::InvalidInterval { lo: a.to_string(), hi: b.to_string() });
        }
        let m = match tail.strip_prefix(':') {
            Some(s) => s.trim().parse::<u32>().map_err(|_| bad("bad smoothness"))?,
            None if tail.trim().is_empty() => DEFAULT_TEST_M,
            None => return Err(bad("unexpected trailing text")),
        };
        let p = Polynomial::new(coeffs.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?);
        let mid = (&a + &b) / int(2);
        let half = (&b - &a) / int(2);
        return Ok(build_base(m)?.shape.affine(&half, &mid)?.mul_poly(&p));
    }
    Err(bad("expected bump@... or poly:..."))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::default_ladder;
    use crate::mollifier::build_mollifier;
    use crate::scalar::rat;

    fn net(k: usize, m: u32) -> DeltaNet {
        let base = build_base(m).unwrap();
        DeltaNet::new(build_mollifier(k, &rat(1, 16), &base, 1).unwrap())
    }

    fn ladder() -> Vec<Rational> {
        default_ladder().points()
    }

    #[test]
    fn delta_embeds_as_the_net() {
        let n = net(2, 5);
        let r = embed_distribution(&Dist::delta(int(0)), &Domain1D::whole_line(), &n, &ladder()).unwrap();
        for (e, s) in r.ladder.iter().zip(&r.slices) {
            assert_eq!(s.smooth, n.instantiate(e).unwrap());
        }
        let dr = embed_distribution(&Dist::DeltaDeriv { order: 1, at: int(0) }, &Domain1D::whole_line(), &n, &ladder()).unwrap();
        assert_eq!(dr, Representative { provenance: dr.provenance.clone(), ..r.derivative(1).unwrap() });
    }

    #[test]
    fn linearity_is_exact() {
        let n = net(2, 5);
        let dom = Domain1D::whole_line();
        let l = ladder();
        let t = parse_distribution_ok("2*delta + 3*D(heaviside)");
        let lhs = embed_distribution(&t, &dom, &n, &l).unwrap();
        let a = embed_distribution(&Dist::delta(int(0)), &dom, &n, &l).unwrap();
        let b = embed_distribution(&parse_distribution_ok("D(heaviside)"), &dom, &n, &l).unwrap();
        let rhs = a.scale(&int(2)).add(&b.scale(&int(3))).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    fn parse_distribution_ok(s: &str) -> Dist {
        crate::dist::parse_distribution(s).unwrap()
    }

    #[test]
    fn delta_pairing_fits_a_constant() {
        let n = net(2, 5);
        let r = embed_distribution(&Dist::delta(int(0)), &Domain1D::whole_line(), &n, &ladder()).unwrap();
        let phi = parse_test_function("bump@0:1").unwrap();
        let res = rep_pair(&r, &phi, &Grid::Integers, &int(8), &rat(1, 1_000_000)).unwrap();
        assert!(res.warning.is_none());
        assert_eq!(res.fit.coeff(&int(0)), phi.eval(&int(0)));
        assert!(res.fit.coeff(&int(-1)).is_zero());
    }

    #[test]
    fn classification_of_delta_and_heaviside() {
        let n = net(2, 6);
        let dom = Domain1D::whole_line();
        let k = CompactWindow::new(int(-1), int(1), &dom).unwrap();
        let r = embed_distribution(&Dist::delta(int(0)), &dom, &n, &ladder()).unwrap();
        let rep = classify(&r, &k, 2, 4).unwrap();
        for row in &rep.rows {
            assert_eq!(row.order.exact_slope, Some(int(-(1 + row.alpha as i64))));
            assert_eq!(row.class, Growth::Moderate { m: 1 + row.alpha as i64 });
        }
        let h = embed_distribution(&Dist::heaviside(int(0)), &dom, &n, &ladder()).unwrap();
        let rep = classify(&h, &k, 0, 4).unwrap();
        assert_eq!(rep.rows[0].order.exact_slope, Some(int(0)));
    }

    #[test]
    fn boundary_atoms_are_flagged() {
        let n = net(1, 4);
        let dom = Domain1D::parse("(0,10)").unwrap();
        let err = embed_distribution(&Dist::delta(rat(1, 4)), &dom, &n, &ladder()).unwrap_err();
        assert!(matches!(err, Error::BoundaryFlag { .. }));
        assert!(embed_distribution(&Dist::delta(int(1)), &dom, &n, &ladder()).is_ok());
    }

    #[test]
    fn pv_embedding_pairs_within_enclosures() {
        let n = net(1, 4);
        let dom = Domain1D::whole_line();
        let l: Vec<Rational> = ladder().into_iter().take(4).collect();
        let r = embed_distribution(&Dist::PrincipalValue, &dom, &n, &l).unwrap();
        let phi = parse_test_function("bump@1/2:1").unwrap();
        let tol = rpow(&int(2), -30);
        let exact = pair(&Dist::PrincipalValue, &phi, &tol).unwrap().to_enclosure();
        for (_, v) in pair_slices(&r, &phi, &tol).unwrap() {
            let v = v.to_enclosure();
            assert!((v.mid() - exact.mid()).abs() < rat(1, 10));
        }
        assert!(matches!(
            embed_distribution(&Dist::PrincipalValue, &Domain1D::parse("(-1,1)").unwrap(), &n, &l),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn test_function_specs() {
        let b = parse_test_function("bump@1/3:1/2:4").unwrap();
        assert_eq!(b.support(), Some((rat(-1, 6), rat(5, 6))));
        assert_eq!(b.integral().unwrap(), rat(1, 2));
        let p = parse_test_function("poly:0,1@[-1,1]").unwrap();
        assert_eq!(p.eval(&rat(1, 2)), rat(1, 2) * build_base(3).unwrap().shape.eval(&rat(1, 2)));
        assert!(parse_test_function("wave@0").is_err());
    }
}
