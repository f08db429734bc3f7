//! Newton–Puiseux roots of polynomials of degree at most 4 with series coefficients.
//!
//! The Newton polygon of the coefficient valuations gives the leading exponent
//! of every root; the leading coefficient is a root of the edge's
//! characteristic polynomial, found exactly in `Q(i)` when possible. Simple
//! characteristic roots are lifted by Newton's iteration in the series field;
//! repeated ones are separated by substituting `z = ε^γ (c + w)` and recursing.

use num_complex::Complex;
use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Series, Valuation};
use crate::error::{Error, Result};
use crate::exact::Polynomial;
use crate::scalar::{binomial, rational_root, Rational};

type C = Complex<Rational>;
type S = Series<C>;

const MAX_DEPTH: usize = 12;
const MAX_NEWTON_STEPS: usize = 64;

/// One root, possibly only partially lifted.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxRoot {
    pub value: S,
    /// False when a characteristic coefficient left `Q(i)` or the lift did not settle.
    pub exact: bool,
    pub note: Option<String>,
}

impl PuiseuxRoot {
    fn exact(value: S) -> Self {
        Self { value, exact: true, note: None }
    }
}

/// All `deg p` roots of `sum coeffs[j] z^j`, each known to order at most `trunc`.
pub fn puiseux_roots(coeffs: &[S], trunc: &Rational) -> Result<Vec<PuiseuxRoot>> {
    let n = coeffs.len().checked_sub(1).ok_or_else(|| Error::Domain("empty polynomial".into()))?;
    if n > 4 {
        return Err(Error::UnsupportedDegree(n));
    }
    if coeffs[n].is_zero() {
        return Err(Error::Domain("leading coefficient is zero up to truncation".into()));
    }
    Ok(roots_rec(coeffs, trunc, 0))
}

/// Horner evaluation with series arithmetic.
pub fn eval_poly(coeffs: &[S], z: &S) -> S {
    let mut it = coeffs.iter().rev();
    let mut acc = it.next().cloned().expect("nonempty");
    for a in it {
        acc = &(&acc * z) + a;
    }
    acc
}

fn derivative(coeffs: &[S]) -> Vec<S> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, a)| a.scale(&Complex::new(Rational::from_integer(BigInt::from(j)), Rational::zero())))
        .collect()
}

fn val(s: &S) -> Option<Rational> {
    s.valuation().finite().cloned()
}

fn roots_rec(p: &[S], target: &Rational, depth: usize) -> Vec<PuiseuxRoot> {
    let n = p.len() - 1;
    let mut out = Vec::new();
    // Coefficients that vanish up to truncation give roots known only to be small.
    let m = p.iter().take_while(|a| a.is_zero()).count();
    if m > 0 {
        let vm = val(&p[m]).expect("leading coefficient nonzero");
        let bound = (0..m)
            .map(|j| (p[j].trunc() - &vm) / Rational::from_integer(BigInt::from(m - j)))
            .min()
            .unwrap()
            .min(target.clone());
        out.extend((0..m).map(|_| PuiseuxRoot::exact(S::zero(bound.clone()))));
    }
    let pts: Vec<(usize, Rational)> = (m..=n).filter_map(|j| val(&p[j]).map(|v| (j, v))).collect();
    let mut i = 0;
    while i + 1 < pts.len() {
        // Next hull vertex: smallest slope, farthest on ties.
        let (ji, vi) = &pts[i];
        let mut best = i + 1;
        let slope = |k: usize| (&pts[k].1 - vi) / Rational::from_integer(BigInt::from(pts[k].0 - ji));
        for k in i + 2..pts.len() {
            if slope(k) <= slope(best) {
                best = k;
            }
        }
        let s = slope(best);
        let gamma = -s.clone();
        let (jb, _) = &pts[best];
        let char_poly: Vec<C> = (*ji..=*jb)
            .map(|l| match val(&p[l]) {
                Some(v) if v == vi + &s * Rational::from_integer(BigInt::from(l - ji)) => p[l].leading().unwrap().1.clone(),
                _ => C::zero(),
            })
            .collect();
        let v_edge = vi + &gamma * Rational::from_integer(BigInt::from(*ji));
        let (found, unresolved) = gaussian_roots(&char_poly);
        for (c, mult) in group(found) {
            if c.is_zero() {
                continue;
            }
            if mult == 1 {
                out.push(newton_lift(p, &c, &gamma, target));
            } else if depth >= MAX_DEPTH {
                for _ in 0..mult {
                    out.push(PuiseuxRoot {
                        value: S::monomial(c.clone(), gamma.clone(), gamma.clone() + Rational::new(1.into(), 1_000_000.into())),
                        exact: false,
                        note: Some("recursion depth reached while separating a repeated root".into()),
                    });
                }
            } else {
                let p1 = substitute(p, &c, &gamma, &v_edge);
                let inner = roots_rec(&p1, &(target - &gamma), depth + 1);
                let mut taken = 0;
                for r in inner {
                    let positive = match r.value.valuation() {
                        Valuation::Infinite => true,
                        Valuation::Finite(v) => v.is_positive(),
                    };
                    if positive && taken < mult {
                        taken += 1;
                        let z = (&S::constant(c.clone(), r.value.trunc().clone()) + &r.value).shift(&gamma);
                        out.push(PuiseuxRoot { value: z.truncate(target), exact: r.exact, note: r.note });
                    }
                }
            }
        }
        for _ in 0..unresolved {
            out.push(PuiseuxRoot {
                value: S::zero(gamma.clone()),
                exact: false,
                note: Some(format!("leading coefficient at exponent {gamma} is not in Q(i); root known only as O(e^{gamma})")),
            });
        }
        i = best;
    }
    out
}

/// `ε^{-v} P(ε^γ (c + w))` as a polynomial in `w`.
fn substitute(p: &[S], c: &C, gamma: &Rational, v_edge: &Rational) -> Vec<S> {
    let n = p.len() - 1;
    (0..=n)
        .map(|i| {
            let mut acc: Option<S> = None;
            for (j, a) in p.iter().enumerate().skip(i) {
                let k = C::new(Rational::from_integer(binomial(j as u64, i as u64)), Rational::zero()) * pow_c(c, j - i);
                let term = a.shift(&(gamma * Rational::from_integer(BigInt::from(j)) - v_edge)).scale(&k);
                acc = Some(match acc {
                    Some(s) => &s + &term,
                    None => term,
                });
            }
            acc.unwrap()
        })
        .collect()
}

fn pow_c(c: &C, n: usize) -> C {
    (0..n).fold(C::one(), |acc, _| acc * c.clone())
}

fn newton_lift(p: &[S], c: &C, gamma: &Rational, target: &Rational) -> PuiseuxRoot {
    let dp = derivative(p);
    let slack = p.iter().map(|a| a.trunc().clone()).max().unwrap() + gamma.abs() * Rational::from_integer(8.into());
    let work = target + slack.abs() + Rational::one();
    let mut z = S::monomial(c.clone(), gamma.clone(), work.clone());
    let mut settled = false;
    for _ in 0..MAX_NEWTON_STEPS {
        let pz = eval_poly(p, &z);
        let dpz = eval_poly(&dp, &z);
        let Ok(corr) = pz.div(&dpz) else { break };
        if corr.is_zero() {
            settled = true;
            break;
        }
        z = (&z - &corr).with_trunc(work.clone());
    }
    let pz = eval_poly(p, &z);
    let dpz = eval_poly(&dp, &z);
    let mut t = target.clone();
    if let Some(v) = val(&dpz) {
        t = t.min(pz.trunc() - v);
    }
    if !settled {
        if let Ok(corr) = pz.div(&dpz) {
            if let Some(v) = val(&corr) {
                t = t.min(v);
            }
        }
    }
    PuiseuxRoot {
        value: z.with_trunc(t.max(gamma.clone())),
        exact: settled,
        note: (!settled).then(|| "Newton lifting did not settle".to_string()),
    }
}

fn group(roots: Vec<C>) -> Vec<(C, usize)> {
    let mut out: Vec<(C, usize)> = Vec::new();
    for r in roots {
        match out.iter_mut().find(|(c, _)| *c == r) {
            Some(e) => e.1 += 1,
            None => out.push((r, 1)),
        }
    }
    out
}

/// Square root in `Q(i)` when one exists.
pub fn complex_sqrt(z: &C) -> Option<C> {
    if z.im.is_zero() {
        return if z.re.is_negative() {
            rational_root(&-z.re.clone(), 2).map(|r| C::new(Rational::zero(), r))
        } else {
            rational_root(&z.re, 2).map(|r| C::new(r, Rational::zero()))
        };
    }
    let m = rational_root(&(&z.re * &z.re + &z.im * &z.im), 2)?;
    let x = rational_root(&((&z.re + &m) / Rational::from_integer(2.into())), 2)?;
    let y = &z.im / (&x * Rational::from_integer(2.into()));
    Some(C::new(x, y))
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 || n == 0 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    Some(out)
}

/// Roots in `Q(i)` with repetition, plus the degree left unresolved.
pub fn gaussian_roots(coeffs: &[C]) -> (Vec<C>, usize) {
    let mut p = Polynomial::new(coeffs.to_vec());
    let mut roots = Vec::new();
    loop {
        let Some(d) = p.degree() else { return (roots, 0) };
        let root = match d {
            0 => return (roots, 0),
            1 => Some(-p.coeff(0) / p.coeff(1)),
            2 => {
                let (a, b, c) = (p.coeff(2), p.coeff(1), p.coeff(0));
                let four = C::new(Rational::from_integer(4.into()), Rational::zero());
                match complex_sqrt(&(b.clone() * b.clone() - four * a.clone() * c)) {
                    Some(s) => Some((-b - s) / (a * C::new(Rational::from_integer(2.into()), Rational::zero()))),
                    None => return (roots, 2),
                }
            }
            _ => find_rational_root(&p),
        };
        match root {
            Some(r) => {
                let (q, _) = p.div_rem(&Polynomial::new(vec![-r.clone(), C::one()])).expect("monic divisor");
                roots.push(r);
                p = q;
            }
            None => return (roots, d),
        }
    }
}

fn find_rational_root(p: &Polynomial<C>) -> Option<C> {
    if p.coeff(0).is_zero() {
        return Some(C::zero());
    }
    let d = p.degree()?;
    // Binomial z^d + a0: exact d-th root of a real value.
    if (1..d).all(|j| p.coeff(j).is_zero()) {
        let r = -p.coeff(0) / p.coeff(d);
        if r.im.is_zero() {
            if let Some(x) = rational_root(&r.re, d as u32) {
                return Some(C::new(x, Rational::zero()));
            }
        }
    }
    if p.coeffs().iter().any(|c| !c.im.is_zero()) {
        return None;
    }
    // Rational root theorem on the integer-scaled real polynomial.
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.re.denom()));
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (&c.re * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let num = divisors(&ints[0])?;
    let den = divisors(&ints[d])?;
    let real = Polynomial::new(p.coeffs().iter().map(|c| c.re.clone()).collect());
    for a in &num {
        for b in &den {
            for s in [1, -1] {
                let x = Rational::new(a * BigInt::from(s), b.clone());
                if real.eval(&x).is_zero() {
                    return Some(C::new(x, Rational::zero()));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn r(q: Rational) -> C {
        C::new(q, Rational::zero())
    }

    fn real_series(terms: &[(Rational, Rational)]) -> S {
        S::new(terms.iter().map(|(q, c)| (q.clone(), r(c.clone()))), int(8))
    }

    #[test]
    fn square_root_of_eps() {
        let p = vec![real_series(&[(int(1), int(-1))]), S::zero(int(8)), S::one(int(8))];
        let roots = puiseux_roots(&p, &int(8)).unwrap();
        assert_eq!(roots.len(), 2);
        for root in &roots {
            assert!(root.exact);
            assert_eq!(root.value.trunc(), &rat(15, 2));
            assert_eq!(root.value.terms().len(), 1);
            assert_eq!(root.value.valuation(), Valuation::Finite(rat(1, 2)));
            let res = eval_poly(&p, &root.value);
            assert!(res.is_zero() && res.trunc() >= &int(8), "{res}");
        }
        let mut lead: Vec<Rational> = roots.iter().map(|x| x.value.leading().unwrap().1.re.clone()).collect();
        lead.sort();
        assert_eq!(lead, vec![int(-1), int(1)]);
    }

    #[test]
    fn binomial_series_root() {
        // z^2 - (1 + e): oracle is the binomial series of (1+e)^{1/2}
        let p = vec![real_series(&[(int(0), int(-1)), (int(1), int(-1))]), S::zero(int(8)), S::one(int(8))];
        let roots = puiseux_roots(&p, &int(8)).unwrap();
        let pos = roots.iter().find(|x| x.value.coeff(&int(0)).re.is_positive()).unwrap();
        let mut coeff = Rational::one();
        for k in 0..8i64 {
            assert_eq!(pos.value.coeff(&int(k)).re, coeff, "term {k}");
            // binom(1/2, k+1) = binom(1/2, k) * (1/2 - k) / (k + 1)
            coeff = coeff * (rat(1, 2) - int(k)) / int(k + 1);
        }
        let sq = &pos.value * &pos.value;
        assert_eq!((&sq - &real_series(&[(int(0), int(1)), (int(1), int(1))])).is_zero(), true);
    }

    #[test]
    fn linear_and_degree_limit() {
        let p = vec![S::real_constant(int(-5), int(8)), S::one(int(8))];
        let roots = puiseux_roots(&p, &int(8)).unwrap();
        assert_eq!(roots[0].value, S::real_constant(int(5), int(8)));
        let big = vec![S::one(int(8)); 6];
        assert_eq!(puiseux_roots(&big, &int(8)), Err(Error::UnsupportedDegree(5)));
    }

    #[test]
    fn repeated_root_separated() {
        // (z - e)^2: a double root is only determined to half the coefficient order
        let e = S::eps(int(8));
        let p = vec![&e * &e, e.scale(&r(int(-2))), S::one(int(8))];
        let roots = puiseux_roots(&p, &int(8)).unwrap();
        assert_eq!(roots.len(), 2);
        for root in roots {
            assert_eq!(root.value.coeff(&int(1)), r(int(1)));
            assert_eq!(root.value.terms().len(), 1);
        }
    }

    #[test]
    fn irrational_coefficient_flagged() {
        // z^2 - 2: ±√2 is not in Q(i)
        let p = vec![S::real_constant(int(-2), int(8)), S::zero(int(8)), S::one(int(8))];
        let roots = puiseux_roots(&p, &int(8)).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|x| !x.exact && x.note.is_some()));
    }

    #[test]
    fn gaussian_roots_found() {
        // z^2 + 1 -> ±i ; z^3 - 8 -> 2 plus an irreducible quadratic
        let (rs, left) = gaussian_roots(&[r(int(1)), C::zero(), C::one()]);
        assert_eq!(left, 0);
        assert!(rs.contains(&C::new(int(0), int(1))));
        let (rs, left) = gaussian_roots(&[r(int(-8)), C::zero(), C::zero(), C::one()]);
        assert_eq!((rs, left), (vec![r(int(2))], 2));
        let (rs, _) = gaussian_roots(&[r(int(-6)), r(int(11)), r(int(-6)), r(int(1))]);
        assert_eq!(rs.len(), 3);
    }
}
