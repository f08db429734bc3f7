//! Delta nets `D_ε(x) = ε^{-d} θ(x/ε)` and cut-offs `Π = χ_X ⋆ D_ε`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::Domain1D;
use crate::error::{Error, Result};
use crate::exact::io::rational_str;
use crate::exact::{ln_enclosure, Enclosure};
use crate::mollifier::{multi_indices, Mollifier};
use crate::scalar::{int, rpow, Rational};
use crate::PiecewisePoly;

/// Relative slack allowed on sup enclosures in audits.
fn sup_rel_tol() -> Rational {
    rpow(&int(2), -30)
}

/// A stage-`k` mollifier `θ`, instantiated at any `ε ∈ (0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaNet {
    pub base: Mollifier,
}

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::Domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

impl DeltaNet {
    pub fn new(base: Mollifier) -> Self {
        Self { base }
    }

    pub fn k(&self) -> usize {
        self.base.k
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// The 1-d factor `ε^{-1} θ₁(x/ε)`; in `d` dimensions `D_ε` is its `d`-fold tensor product.
    pub fn instantiate(&self, epsilon: &Rational) -> Result<PiecewisePoly> {
        check_epsilon(epsilon)?;
        Ok(self.base.shape.affine(epsilon, &Rational::zero())?.scale(&epsilon.recip()))
    }

    /// `D_ε(x)` at a point of `R^d`.
    pub fn eval(&self, epsilon: &Rational, x: &[Rational]) -> Result<Rational> {
        let f = self.instantiate(epsilon)?;
        Ok(x.iter().map(|xi| f.eval(xi)).fold(Rational::one(), |a, b| a * b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub alpha: Vec<usize>,
    #[serde(with = "rational_str")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub alpha: Vec<usize>,
    /// `sup |∂^α D_ε|`.
    pub sup: Enclosure,
    /// `ε^{d+|α|} sup |∂^α D_ε|`.
    pub rescaled: Enclosure,
    /// `sup |∂^α θ|`.
    pub base_sup: Enclosure,
    /// `|ln ε|^{-1} ε^{d+|α|} sup |∂^α D_ε|`.
    pub normalized: Enclosure,
}

/// The five delta-net properties at one `ε`, up to stage `k` and `alpha_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    pub k: usize,
    pub dim: usize,
    pub alpha_max: usize,
    /// Radius of the 1-d factor's support.
    #[serde(with = "rational_str")]
    pub support_radius: Rational,
    /// `d r² <= ε²`, so the support lies in the ball of radius `ε`.
    pub support_in_ball: bool,
    #[serde(with = "rational_str")]
    pub mass: Rational,
    /// Moments with `1 <= |α| <= k + 2`.
    pub moments: Vec<MomentRow>,
    pub moments_vanish: bool,
    pub first_nonzero_moment: Option<usize>,
    pub l1: Enclosure,
    pub excess: Enclosure,
    pub base_excess: Enclosure,
    /// `∫|D_ε| - 1 <= 1/k`.
    pub excess_ok: bool,
    /// `∂^j D_ε = ε^{-1-j} (∂^j θ)(x/ε)` holds exactly for the 1-d factor.
    pub derivative_scaling_exact: bool,
    pub derivatives: Vec<DerivativeRow>,
}

impl DeltaReport {
    /// (i) to (iii) exact and (iv) within `1/k`.
    pub fn passes(&self) -> bool {
        self.support_in_ball && self.mass.is_one() && self.moments_vanish && self.excess_ok && self.derivative_scaling_exact
    }
}

fn tensor_moment(f: &PiecewisePoly, alpha: &[usize]) -> Result<Rational> {
    alpha.iter().try_fold(Rational::one(), |acc, &a| Ok(acc * f.moment(a)?))
}

fn product(encs: impl Iterator<Item = Enclosure>) -> Enclosure {
    encs.fold(Enclosure::point(Rational::one()), |a, b| a * b)
}

pub fn audit_delta(net: &DeltaNet, epsilon: &Rational, alpha_max: usize) -> Result<DeltaReport> {
    let m = net.base.m() as usize;
    if alpha_max + 1 >= m {
        return Err(Error::InsufficientSmoothness(format!(
            "alpha_max = {alpha_max} needs a base bump with m > {}, got m = {m}",
            alpha_max + 1
        )));
    }
    let (k, d) = (net.k(), net.dim());
    let f = net.instantiate(epsilon)?;
    let theta = &net.base.shape;
    let (lo, hi) = f.support().unwrap_or((Rational::zero(), Rational::zero()));
    let r = lo.abs().max(hi.abs());
    let support_in_ball = int(d as i64) * &r * &r <= epsilon * epsilon;

    let mass = tensor_moment(&f, &vec![0; d])?;
    let mut moments = Vec::new();
    for alpha in multi_indices(d, k + 2) {
        let total: usize = alpha.iter().sum();
        if total == 0 {
            continue;
        }
        let value = tensor_moment(&f, &alpha)?;
        moments.push(MomentRow { alpha, value });
    }
    let order = |row: &MomentRow| row.alpha.iter().sum::<usize>();
    let moments_vanish = moments.iter().filter(|r| order(r) <= k).all(|r| r.value.is_zero());
    let first_nonzero_moment = moments.iter().filter(|r| !r.value.is_zero()).map(order).min();

    let tol = rpow(&int(2), -40);
    let l1_of = |g: &PiecewisePoly| -> Result<Enclosure> {
        let e = g.l1_enclosure(&tol)?;
        Ok(product(std::iter::repeat(e).take(d)))
    };
    let l1 = l1_of(&f)?;
    let one = Enclosure::point(Rational::one());
    let excess = l1.clone() - one.clone();
    let base_excess = l1_of(theta)? - one;
    let excess_ok = excess.hi <= int(k as i64).recip();

    let rel = sup_rel_tol();
    let mut sups = Vec::new();
    let mut base_sups = Vec::new();
    let mut derivative_scaling_exact = true;
    let (mut fj, mut tj) = (f.clone(), theta.clone());
    for j in 0..=alpha_max {
        if j > 0 {
            fj = fj.derivative()?;
            tj = tj.derivative()?;
        }
        let expect = tj.affine(epsilon, &Rational::zero())?.scale(&rpow(epsilon, -(1 + j as i64)));
        derivative_scaling_exact &= expect == fj;
        let (a, b) = fj.support().unwrap_or((Rational::zero(), Rational::zero()));
        sups.push(fj.sup_enclosure(&a, &b, &rel)?);
        let (a, b) = tj.support().unwrap_or((Rational::zero(), Rational::zero()));
        base_sups.push(tj.sup_enclosure(&a, &b, &rel)?);
    }
    let ln = ln_enclosure(&epsilon.recip(), &rpow(&int(2), -60));
    let mut derivatives = Vec::new();
    for alpha in multi_indices(d, alpha_max) {
        let total: usize = alpha.iter().sum();
        let sup = product(alpha.iter().map(|&a| sups[a].clone()));
        let base_sup = product(alpha.iter().map(|&a| base_sups[a].clone()));
        let rescaled = sup.scale(&rpow(epsilon, (d + total) as i64));
        let normalized = Enclosure::new(&rescaled.lo / &ln.hi, &rescaled.hi / &ln.lo);
        derivatives.push(DerivativeRow { alpha, sup, rescaled, base_sup, normalized });
    }

    Ok(DeltaReport {
        epsilon: epsilon.clone(),
        k,
        dim: d,
        alpha_max,
        support_radius: r,
        support_in_ball,
        mass,
        moments,
        moments_vanish,
        first_nonzero_moment,
        l1,
        excess,
        base_excess,
        excess_ok,
        derivative_scaling_exact,
        derivatives,
    })
}

/// Smooth window `Π = χ_X ⋆ D_ε` with `X = {|x| <= 1/ε, d(x, ∂Ω) >= 2ε}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    pub epsilon: Rational,
    pub shape: PiecewisePoly,
    pub domain: Domain1D,
    pub warning: Option<String>,
    /// Number of exact evaluations used to verify the sandwich.
    pub probes: usize,
}

impl Cutoff {
    pub fn plateau(&self) -> Vec<(Rational, Rational)> {
        plateau(&self.domain, &self.epsilon)
    }

    /// Whether `[a, b]` sits inside the guaranteed plateau.
    pub fn plateau_contains(&self, a: &Rational, b: &Rational) -> bool {
        self.plateau().iter().any(|(l, h)| l <= a && b <= h)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.shape.eval(x)
    }

    pub fn to_file(&self) -> CutoffFile {
        CutoffFile { epsilon: self.epsilon.clone(), domain: self.domain.to_string(), shape: self.shape.clone() }
    }
}

/// Region where `Π_ε = 1` is guaranteed: `d(x, ∂Ω) >= 3ε` and `|x| <= 1/ε - 2ε`.
pub fn plateau(domain: &Domain1D, epsilon: &Rational) -> Vec<(Rational, Rational)> {
    domain.shrink(&(int(3) * epsilon), &(epsilon.recip() - int(2) * epsilon))
}

/// JSON form `{epsilon, domain, shape}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFile {
    #[serde(with = "rational_str")]
    pub epsilon: Rational,
    pub domain: String,
    pub shape: PiecewisePoly,
}

/// The closed set `X` as disjoint intervals.
pub fn cutoff_core(domain: &Domain1D, epsilon: &Rational) -> Vec<(Rational, Rational)> {
    domain.shrink(&(int(2) * epsilon), &epsilon.recip())
}

pub fn build_cutoff(domain: &Domain1D, epsilon: &Rational, net: &DeltaNet) -> Result<Cutoff> {
    if net.dim() != 1 {
        return Err(Error::Unsupported("cut-offs are built for one-dimensional domains only".into()));
    }
    let d = net.instantiate(epsilon)?;
    let core = cutoff_core(domain, epsilon);
    let mut chi = PiecewisePoly::zero();
    for (a, b) in &core {
        if a < b {
            chi = chi.add(&PiecewisePoly::indicator(a.clone(), b.clone())?);
        }
    }
    let warning = chi.is_zero().then(|| format!("X is empty for epsilon = {epsilon}; the cut-off is identically zero"));
    let shape = if chi.is_zero() { chi } else { chi.convolve(&d)? };
    let mut cut = Cutoff { epsilon: epsilon.clone(), shape, domain: domain.clone(), warning, probes: 0 };
    cut.probes = verify_cutoff(&cut, net)?;
    Ok(cut)
}

/// Evaluation points: breakpoints of `Π`, their midpoints and the ends of the
/// plateau and zero regions.
pub fn critical_points(cut: &Cutoff) -> Vec<Rational> {
    let e = &cut.epsilon;
    let mut pts: Vec<Rational> = cut.shape.breakpoints().to_vec();
    for iv in cut.domain.intervals() {
        for end in [&iv.lo, &iv.hi].into_iter().flatten() {
            for c in -3..=3 {
                pts.push(end + int(c) * e);
            }
        }
    }
    for (a, b) in cut.plateau() {
        pts.push(a);
        pts.push(b);
    }
    pts.sort();
    pts.dedup();
    let mids: Vec<Rational> = pts.windows(2).map(|w| (&w[0] + &w[1]) / int(2)).collect();
    pts.extend(mids);
    pts.sort();
    pts
}

/// Checks the sandwich at the critical points; returns the number of points checked.
pub fn verify_cutoff(cut: &Cutoff, net: &DeltaNet) -> Result<usize> {
    let bound = net.base.shape.l1_enclosure(&rpow(&int(2), -20))?.hi;
    let pts = critical_points(cut);
    for x in &pts {
        check_point(cut, x, &bound)?;
    }
    Ok(pts.len())
}

/// Sandwich at a single point: 1 on the plateau, 0 within `ε` of the boundary, `|Π| <= ∫|D|`.
pub fn check_point(cut: &Cutoff, x: &Rational, bound: &Rational) -> Result<()> {
    let e = &cut.epsilon;
    let v = cut.eval(x);
    let near = cut.domain.dist_to_boundary(x).is_some_and(|d| d < *e);
    let inside = cut.plateau().iter().any(|(a, b)| a <= x && x <= b) && cut.warning.is_none();
    if near && !v.is_zero() {
        return Err(Error::Domain(format!("cut-off is {v} at {x}, within epsilon of the boundary")));
    }
    if inside && !v.is_one() {
        return Err(Error::Domain(format!("cut-off is {v} at {x}, inside the plateau")));
    }
    if v.abs() > *bound {
        return Err(Error::Domain(format!("cut-off is {v} at {x}, above the L1 bound {bound}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{build_base, build_mollifier};
    use crate::scalar::rat;

    fn net(k: usize, m: u32) -> DeltaNet {
        let base = build_base(m).unwrap();
        DeltaNet::new(build_mollifier(k, &rat(1, 4), &base, 1).unwrap())
    }

    #[test]
    fn instantiation_is_exact() {
        let n = net(1, 4);
        for e in [rat(1, 2), rat(1, 8), rat(1, 64)] {
            let f = n.instantiate(&e).unwrap();
            assert!(f.integral().unwrap().is_one());
            assert_eq!(f.support().unwrap(), (-e.clone(), e.clone()));
            // second moment scales as ε² μ₂(θ)
            let mu2 = n.base.shape.moment(2).unwrap();
            assert_eq!(f.moment(2).unwrap(), &e * &e * mu2);
        }
        assert!(n.instantiate(&int(1)).is_err());
        assert!(n.instantiate(&int(0)).is_err());
    }

    #[test]
    fn audit_reports_exact_properties() {
        let n = net(2, 6);
        let r = audit_delta(&n, &rat(1, 16), 3).unwrap();
        assert!(r.support_in_ball && r.mass.is_one() && r.moments_vanish && r.derivative_scaling_exact);
        assert_eq!(r.first_nonzero_moment, Some(4));
        assert_eq!(r.excess, r.base_excess);
        for row in &r.derivatives {
            assert_eq!(row.rescaled, row.base_sup);
        }
        assert!(matches!(audit_delta(&n, &rat(1, 16), 5), Err(Error::InsufficientSmoothness(_))));
    }

    #[test]
    fn cutoff_on_interval() {
        let n = net(1, 3);
        let dom = Domain1D::parse("(0,10)").unwrap();
        let e = rat(1, 8);
        let c = build_cutoff(&dom, &e, &n).unwrap();
        assert!(c.warning.is_none());
        assert_eq!(c.plateau(), vec![(rat(3, 8), rat(31, 4))]);
        assert!(c.eval(&rat(1, 2)).is_one());
        assert!(c.eval(&rat(1, 8)).is_zero());
        assert!(c.eval(&rat(1, 16)).is_zero());
        assert!(c.eval(&int(9)).is_zero());
    }

    #[test]
    fn empty_core_gives_zero_cutoff() {
        let n = net(1, 3);
        let dom = Domain1D::parse("(0,1/2)").unwrap();
        let c = build_cutoff(&dom, &rat(1, 4), &n).unwrap();
        assert!(c.warning.is_some() && c.shape.is_zero());
    }

    #[test]
    fn whole_line_cutoff() {
        let n = net(1, 3);
        let e = rat(1, 4);
        let c = build_cutoff(&Domain1D::whole_line(), &e, &n).unwrap();
        assert!(c.eval(&rat(-7, 2)).is_one() && c.eval(&rat(7, 2)).is_one());
        assert!(c.eval(&int(5)).is_zero());
    }
}
