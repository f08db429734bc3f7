//! Ladders of ε values and extraction of expansions `Σ a_q ε^q` from exact samples.

use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::io::{rational_str, rational_vec};
use crate::exact::linalg::{solve, solve_many, weighted_normal_equations};
use crate::exact::Value;
use crate::field::Series;
use crate::scalar::{exact_log_ratio, int, ln_abs_f64, parse_rational, rat, rational_power, rational_to_f64, rpow, Rational};
use crate::AsymptoticNumber;

/// Default acceptance threshold for [`ExpansionFit::residual`].
pub fn default_tolerance() -> Rational {
    rat(1, 1_000_000)
}

/// Geometric ladder `ε_i = base * ratio^i`, `i = 0..count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsLadder {
    #[serde(with = "rational_str")]
    pub base: Rational,
    #[serde(with = "rational_str")]
    pub ratio: Rational,
    pub count: usize,
}

impl EpsLadder {
    pub fn new(base: Rational, ratio: Rational, count: usize) -> Result<Self> {
        let unit = |q: &Rational| q.is_positive() && *q < Rational::one();
        if !unit(&base) {
            return Err(Error::InvalidLadder(format!("base {base} is not in (0,1)")));
        }
        if !unit(&ratio) {
            return Err(Error::InvalidLadder(format!("ratio {ratio} is not in (0,1)")));
        }
        if count < 4 {
            return Err(Error::InvalidLadder(format!("{count} points; at least 4 are needed")));
        }
        Ok(Self { base, ratio, count })
    }

    /// `2^-3..2^-12` and the like: `b^-i..b^-j` with the same base.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidLadder(format!("expected b^-i..b^-j, got {text:?}"));
        let (a, b) = text.split_once("..").ok_or_else(bad)?;
        let split = |s: &str| -> Result<(Rational, i64)> {
            let (base, exp) = s.trim().split_once('^').ok_or_else(bad)?;
            let exp: i64 = exp.trim().trim_start_matches('(').trim_end_matches(')').parse().map_err(|_| bad())?;
            Ok((parse_rational(base)?, exp))
        };
        let (b1, e1) = split(a)?;
        let (b2, e2) = split(b)?;
        if b1 != b2 || b1 <= Rational::one() || e2 >= e1 {
            return Err(bad());
        }
        Self::new(rpow(&b1, e1), b1.recip(), (e1 - e2 + 1) as usize)
    }

    pub fn points(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.count);
        let mut e = self.base.clone();
        for _ in 0..self.count {
            out.push(e.clone());
            e *= &self.ratio;
        }
        out
    }
}

/// The default ladder `2^-3, ..., 2^-12`.
pub fn default_ladder() -> EpsLadder {
    EpsLadder::new(rat(1, 8), rat(1, 2), 10).expect("valid")
}

/// Common ratio of a list of ε values, if they form a decreasing geometric ladder.
pub fn ladder_ratio(eps: &[Rational]) -> Option<Rational> {
    let r = eps.get(1)? / &eps[0];
    let ok = eps.windows(2).all(|w| &w[1] / &w[0] == r) && r < Rational::one() && r.is_positive();
    ok.then_some(r)
}

/// Exponent grid declared by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Grid {
    /// `-2, -1, 0, 1, ...`, as many as the sample count allows.
    Integers,
    /// `-2, -3/2, -1, ...`, as many as the sample count allows.
    HalfIntegers,
    Explicit(Vec<Rational>),
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "int" => Ok(Grid::Integers),
            "half" => Ok(Grid::HalfIntegers),
            list => {
                let mut qs = list.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                qs.sort();
                qs.dedup();
                Ok(Grid::Explicit(qs))
            }
        }
    }

    pub fn exponents(&self, samples: usize) -> Vec<Rational> {
        let n = samples.saturating_sub(1);
        match self {
            Grid::Integers => (0..n).map(|i| int(i as i64 - 2)).collect(),
            Grid::HalfIntegers => (0..n).map(|i| rat(i as i64 - 4, 2)).collect(),
            Grid::Explicit(qs) => qs.clone(),
        }
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Grid::Integers => write!(f, "int"),
            Grid::HalfIntegers => write!(f, "half"),
            Grid::Explicit(qs) => {
                let parts: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// One fitted term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "rational_str")]
    pub q: Rational,
    #[serde(with = "rational_str")]
    pub coeff: Rational,
}

/// Result of [`fit_expansion`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    /// Terms below the truncation order, increasing exponents.
    pub terms: Vec<Term>,
    /// Grid terms at or above the truncation order; they soak up the remainder and are not reported in the number.
    pub absorbed: Vec<Term>,
    /// Exponents dropped because the term is below the residual everywhere on the ladder.
    #[serde(with = "rational_vec")]
    pub pruned: Vec<Rational>,
    /// `max_i |g(ε_i) - fit(ε_i)| / ε_i^{q_max}`.
    #[serde(with = "rational_str")]
    pub residual: Rational,
    /// `max_q Σ_i |∂a_q/∂g_i|`: bound on coefficient change per unit sample change.
    pub condition: f64,
    /// `condition * max enclosure width`; zero for exact samples.
    pub sensitivity: f64,
    #[serde(with = "rational_vec")]
    pub grid: Vec<Rational>,
    #[serde(with = "rational_str")]
    pub trunc: Rational,
}

impl ExpansionFit {
    pub fn to_number(&self) -> AsymptoticNumber {
        Series::new(
            self.terms.iter().map(|t| (t.q.clone(), Complex::new(t.coeff.clone(), Rational::zero()))),
            self.trunc.clone(),
        )
    }

    pub fn coeff(&self, q: &Rational) -> Rational {
        self.terms.iter().find(|t| t.q == *q).map_or_else(Rational::zero, |t| t.coeff.clone())
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }
}

/// Fits `Σ a_q ε^q` over `grid` to the samples by exact weighted least squares.
///
/// Enclosure-valued samples are fitted at their midpoints; their widths
/// enter only through [`ExpansionFit::sensitivity`].
pub fn fit_expansion(samples: &[(Rational, Value)], grid: &[Rational], trunc: &Rational, tol: &Rational) -> Result<ExpansionFit> {
    let mut grid: Vec<Rational> = grid.to_vec();
    grid.sort();
    grid.dedup();
    let (n, p) = (samples.len(), grid.len());
    if p == 0 {
        return Err(Error::IllPosed { reason: "empty exponent grid".into(), suggestion: "int".into() });
    }
    let suggestion = || {
        let keep: Vec<String> = grid.iter().take(n.saturating_sub(1).max(1)).map(|q| q.to_string()).collect();
        keep.join(",")
    };
    if n <= p {
        return Err(Error::IllPosed {
            reason: format!("{p} exponents need more than {n} samples"),
            suggestion: suggestion(),
        });
    }
    for (e, _) in samples {
        if !e.is_positive() || *e >= Rational::one() {
            return Err(Error::InvalidLadder(format!("sample point {e} is not in (0,1)")));
        }
    }
    let mut a = Vec::with_capacity(n);
    for (e, _) in samples {
        let mut row = Vec::with_capacity(p);
        for q in &grid {
            row.push(rational_power(e, q).ok_or_else(|| Error::IllPosed {
                reason: format!("e^{q} is irrational at e = {e}"),
                suggestion: "integer exponents, or a ladder whose points are perfect powers".into(),
            })?);
        }
        a.push(row);
    }
    let g: Vec<Rational> = samples.iter().map(|(_, v)| v.mid()).collect();
    let width = samples.iter().map(|(_, v)| v.width()).max().unwrap_or_else(Rational::zero);
    // weights 1/ε^{q_max} make the least-squares objective the normalized residual
    let scale: Vec<Rational> = a.iter().map(|row| row[p - 1].clone()).collect();
    let w: Vec<Rational> = scale.iter().map(|s| s.recip()).collect();
    let (ata, atb) = weighted_normal_equations(&a, &g, &w);
    let coeffs = solve(&ata, &atb).map_err(|_| Error::IllPosed {
        reason: "normal equations are singular (grid too dense for the ladder)".into(),
        suggestion: suggestion(),
    })?;
    let resid: Vec<Rational> = a
        .iter()
        .zip(&g)
        .map(|(row, gi)| gi - row.iter().zip(&coeffs).fold(Rational::zero(), |acc, (x, c)| acc + x * c))
        .collect();
    let residual = resid.iter().zip(&scale).map(|(r, s)| r.abs() / s).max().unwrap_or_else(Rational::zero);

    // sensitivity of each coefficient to each sample: rows of (AᵀW²A)⁻¹ AᵀW²
    let atw: Vec<Vec<Rational>> = (0..p).map(|j| (0..n).map(|i| &a[i][j] * &w[i] * &w[i]).collect()).collect();
    let condition = match solve_many(&ata, &atw) {
        Ok(pinv) => pinv.iter().map(|row| row.iter().map(|x| rational_to_f64(&x.abs())).sum::<f64>()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let sensitivity = if width.is_zero() { 0.0 } else { condition * rational_to_f64(&width) };

    let mut terms = Vec::new();
    let mut absorbed = Vec::new();
    let mut pruned = Vec::new();
    for (j, (q, c)) in grid.iter().zip(coeffs).enumerate() {
        if c.is_zero() {
            continue;
        }
        let negligible = !residual.is_zero() && (0..n).all(|i| c.abs() * &a[i][j] <= &residual * &scale[i]);
        if negligible {
            pruned.push(q.clone());
        } else if q < trunc {
            terms.push(Term { q: q.clone(), coeff: c });
        } else {
            absorbed.push(Term { q: q.clone(), coeff: c });
        }
    }
    let fit = ExpansionFit { terms, absorbed, pruned, residual, condition, sensitivity, grid, trunc: trunc.clone() };
    if fit.residual > *tol {
        return Err(Error::NoValidExpansion {
            residual: format!("{:.3e}", rational_to_f64(&fit.residual)),
            tolerance: tol.to_string(),
            fit: Box::new(fit),
        });
    }
    Ok(fit)
}

/// Decay order of a nonnegative error sequence on a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// Log-log slope; `None` when every sample is exactly zero.
    pub slope: Option<f64>,
    /// Present when consecutive ratios are exactly `(ε_{i+1}/ε_i)^s`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub exact_slope: Option<Rational>,
    /// Largest deviation of `ln|v|` from the fitted line.
    pub residual: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Samples that were exactly zero.
    pub zeros: usize,
}

impl OrderEstimate {
    pub fn is_exact_zero(&self) -> bool {
        self.slope.is_none()
    }

    /// Whether the measured decay order is at least `order`.
    pub fn at_least(&self, order: f64) -> bool {
        self.slope.map_or(true, |s| s >= order)
    }
}

impl std::fmt::Display for OrderEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.slope, &self.exact_slope) {
            (None, _) => write!(f, "+inf (exact zero)"),
            (Some(_), Some(s)) => write!(f, "{s} (exact)"),
            (Some(s), None) => write!(f, "{s:.4} ± {:.1e} (fit residual {:.2e})", self.stderr, self.residual),
        }
    }
}

mod opt_rational {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&q.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|t| crate::exact::io::rat_from_str(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Least-squares slope of `ln|v|` against `ln ε`, exact when the data are an exact power law.
pub fn measure_order(samples: &[(Rational, Rational)]) -> Result<OrderEstimate> {
    let zeros = samples.iter().filter(|(_, v)| v.is_zero()).count();
    let pts: Vec<(Rational, Rational)> = samples.iter().filter(|(_, v)| !v.is_zero()).map(|(e, v)| (e.clone(), v.abs())).collect();
    if pts.is_empty() && !samples.is_empty() {
        return Ok(OrderEstimate { slope: None, exact_slope: None, residual: 0.0, stderr: 0.0, zeros });
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} nonzero samples; at least 3 are needed", pts.len())));
    }
    let exact = pts
        .windows(2)
        .map(|w| exact_log_ratio(&(&w[1].1 / &w[0].1), &(&w[1].0 / &w[0].0)))
        .reduce(|a, b| if a == b { a } else { None })
        .flatten();
    if let Some(s) = exact {
        let sf = rational_to_f64(&s);
        return Ok(OrderEstimate { slope: Some(sf), exact_slope: Some(s), residual: 0.0, stderr: 0.0, zeros });
    }
    let xs: Vec<f64> = pts.iter().map(|(e, _)| ln_abs_f64(e)).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| ln_abs_f64(v)).collect();
    let (slope, intercept, stderr) = linear_fit(&xs, &ys);
    let residual = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    Ok(OrderEstimate { slope: Some(slope), exact_slope: None, residual, stderr, zeros })
}

/// Ordinary least squares `y ≈ a x + b`; returns `(a, b, stderr(a))`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let stderr = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (a, b, stderr)
}

/// Samples `(ε, value)` of a real asymptotic number on a ladder.
pub fn sample_number(x: &AsymptoticNumber, ladder: &[Rational]) -> Result<Vec<(Rational, Value)>> {
    ladder
        .iter()
        .map(|e| {
            let v = x.eval_at(e)?;
            if !v.im.is_zero() {
                return Err(Error::NotReal);
            }
            Ok((e.clone(), Value::exact(v.re)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(terms: &[(Rational, Rational)], ladder: &[Rational]) -> Vec<(Rational, Value)> {
        ladder
            .iter()
            .map(|e| {
                let v = terms.iter().fold(Rational::zero(), |acc, (q, c)| acc + c * rational_power(e, q).unwrap());
                (e.clone(), Value::exact(v))
            })
            .collect()
    }

    #[test]
    fn ladders() {
        let l = EpsLadder::new(rat(1, 8), rat(1, 2), 10).unwrap();
        let pts = l.points();
        assert_eq!(pts.first(), Some(&rat(1, 8)));
        assert_eq!(pts.last(), Some(&rat(1, 4096)));
        assert_eq!(EpsLadder::parse("2^-3..2^-12").unwrap(), l);
        assert!(EpsLadder::new(rat(1, 8), int(1), 10).is_err());
        assert!(EpsLadder::new(rat(1, 8), rat(1, 2), 3).is_err());
        assert_eq!(ladder_ratio(&pts), Some(rat(1, 2)));
    }

    #[test]
    fn exact_recovery() {
        let ladder = default_ladder().points();
        let truth = [(int(-1), int(3)), (int(0), int(2)), (int(1), int(5))];
        let grid = Grid::Integers.exponents(ladder.len());
        let fit = fit_expansion(&synth(&truth, &ladder), &grid, &int(5), &default_tolerance()).unwrap();
        assert!(fit.residual.is_zero());
        assert_eq!(fit.terms, truth.iter().map(|(q, c)| Term { q: q.clone(), coeff: c.clone() }).collect::<Vec<_>>());
        let seven = fit_expansion(&synth(&[(int(0), int(7))], &ladder), &grid, &int(8), &default_tolerance()).unwrap();
        assert_eq!(seven.to_number().to_string(), "7 + O(e^8)");
    }

    #[test]
    fn half_integer_exponents() {
        let ladder = EpsLadder::new(rat(1, 4), rat(1, 4), 8).unwrap().points();
        let data = synth(&[(rat(1, 2), int(1))], &ladder);
        let ints = Grid::Explicit((0..5).map(int).collect()).exponents(8);
        assert!(matches!(fit_expansion(&data, &ints, &int(4), &default_tolerance()), Err(Error::NoValidExpansion { .. })));
        let halves = Grid::Explicit((0..6).map(|i| rat(i, 2)).collect()).exponents(8);
        let fit = fit_expansion(&data, &halves, &int(4), &default_tolerance()).unwrap();
        assert_eq!(fit.terms, vec![Term { q: rat(1, 2), coeff: int(1) }]);
    }

    #[test]
    fn rank_and_irrational_powers_rejected() {
        let ladder = default_ladder().points();
        let data = synth(&[(int(0), int(1))], &ladder);
        let dense: Vec<Rational> = (0..12).map(int).collect();
        assert!(matches!(fit_expansion(&data, &dense, &int(4), &default_tolerance()), Err(Error::IllPosed { .. })));
        assert!(matches!(fit_expansion(&data, &[rat(1, 2)], &int(4), &default_tolerance()), Err(Error::IllPosed { .. })));
    }

    #[test]
    fn enclosure_samples_report_sensitivity() {
        let ladder = default_ladder().points();
        let data: Vec<(Rational, Value)> = ladder
            .iter()
            .map(|e| (e.clone(), Value::Enclosure(crate::exact::Enclosure::new(int(2) - rat(1, 1 << 30), int(2) + rat(1, 1 << 30)))))
            .collect();
        let fit = fit_expansion(&data, &[int(0), int(1)], &int(4), &default_tolerance()).unwrap();
        assert_eq!(fit.coeff(&int(0)), int(2));
        assert!(fit.sensitivity > 0.0 && fit.condition.is_finite());
        assert!((fit.sensitivity - fit.condition * 2.0 / (1u64 << 30) as f64).abs() <= 1e-12 * fit.sensitivity.max(1.0));
    }

    #[test]
    fn orders() {
        let ladder = default_ladder().points();
        let sq: Vec<_> = ladder.iter().map(|e| (e.clone(), e * e)).collect();
        let o = measure_order(&sq).unwrap();
        assert_eq!(o.exact_slope, Some(int(2)));
        assert_eq!(o.residual, 0.0);
        let zeros: Vec<_> = ladder.iter().map(|e| (e.clone(), Rational::zero())).collect();
        assert!(measure_order(&zeros).unwrap().is_exact_zero());
        let mixed: Vec<_> = ladder.iter().map(|e| (e.clone(), e * e + e * e * e)).collect();
        let o = measure_order(&mixed).unwrap();
        assert!(o.exact_slope.is_none() && (o.slope.unwrap() - 2.0).abs() < 0.05);
        assert!(matches!(measure_order(&sq[..2]), Err(Error::InsufficientData(_))));
    }
}
