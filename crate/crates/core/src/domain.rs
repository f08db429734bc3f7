//! Open subsets of the line given as finite unions of disjoint open intervals.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// Open interval; `None` marks an infinite end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl Interval {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Result<Self> {
        if let (Some(a), Some(b)) = (&lo, &hi) {
            if a >= b {
                return Err(Error::InvalidInterval { lo: a.to_string(), hi: b.to_string() });
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn bounded(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(Some(lo), Some(hi))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |a| a < x) && self.hi.as_ref().map_or(true, |b| x < b)
    }

    /// Closed-interval length for bounded intervals.
    pub fn length(&self) -> Option<Rational> {
        Some(self.hi.as_ref()? - self.lo.as_ref()?)
    }
}

fn fmt_end(e: &Option<Rational>, neg: bool) -> String {
    match e {
        Some(q) => q.to_string(),
        None if neg => "-inf".into(),
        None => "inf".into(),
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", fmt_end(&self.lo, true), fmt_end(&self.hi, false))
    }
}

/// `Ω ⊂ R`: sorted, disjoint, nonempty open intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain1D {
    intervals: Vec<Interval>,
}

impl Domain1D {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Domain("a domain needs at least one interval".into()));
        }
        intervals.sort_by(|a, b| match (&a.lo, &b.lo) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        for w in intervals.windows(2) {
            match (&w[0].hi, &w[1].lo) {
                (Some(b), Some(a)) if b <= a => {}
                _ => return Err(Error::Domain(format!("intervals {} and {} overlap", w[0], w[1]))),
            }
        }
        Ok(Self { intervals })
    }

    pub fn whole_line() -> Self {
        Self { intervals: vec![Interval { lo: None, hi: None }] }
    }

    pub fn interval(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(vec![Interval::bounded(lo, hi)?])
    }

    /// Comma-separated `(a,b)` with rational, `-inf` or `inf` ends; `R` is the whole line.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "R" || t == "(-inf,inf)" {
            return Ok(Self::whole_line());
        }
        let mut out = Vec::new();
        let mut rest = t;
        let base = text.len() - text.trim_start().len();
        while !rest.is_empty() {
            let pos = base + (t.len() - rest.len());
            let err = |msg: &str| Error::Parse { pos, msg: msg.into() };
            let body = rest.strip_prefix('(').ok_or_else(|| err("expected '('"))?;
            let close = body.find(')').ok_or_else(|| err("missing ')'"))?;
            let (a, b) = body[..close].split_once(',').ok_or_else(|| err("expected 'a,b'"))?;
            let end = |s: &str, neg: bool| -> Result<Option<Rational>> {
                match s.trim() {
                    "-inf" if neg => Ok(None),
                    "inf" | "+inf" if !neg => Ok(None),
                    v => parse_rational(v).map(Some).map_err(|_| err(&format!("bad endpoint {v:?}"))),
                }
            };
            out.push(Interval::new(end(a, true)?, end(b, false)?)?);
            rest = body[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            } else if !rest.is_empty() {
                return Err(err("expected ',' between intervals"));
            }
        }
        Self::new(out)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_whole_line(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0].lo.is_none() && self.intervals[0].hi.is_none()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// `d(x, ∂Ω)` for `x ∈ Ω`, zero outside, `None` when there is no boundary.
    pub fn dist_to_boundary(&self, x: &Rational) -> Option<Rational> {
        if self.is_whole_line() {
            return None;
        }
        let Some(iv) = self.intervals.iter().find(|i| i.contains(x)) else {
            return Some(Rational::zero());
        };
        let dl = iv.lo.as_ref().map(|a| x - a);
        let dh = iv.hi.as_ref().map(|b| b - x);
        match (dl, dh) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    /// `Ω_ρ = {x : d(x, ∂Ω) >= ρ}`, restricted to `|x| <= R`, as closed intervals.
    pub fn shrink(&self, rho: &Rational, radius: &Rational) -> Vec<(Rational, Rational)> {
        self.intervals
            .iter()
            .filter_map(|iv| {
                let lo = iv.lo.as_ref().map_or(-radius.clone(), |a| (a + rho).max(-radius.clone()));
                let hi = iv.hi.as_ref().map_or(radius.clone(), |b| (b - rho).min(radius.clone()));
                (lo <= hi).then_some((lo, hi))
            })
            .collect()
    }

    /// Whether `[a, b]` sits inside one interval with distance at least `margin` to its ends.
    pub fn contains_with_margin(&self, a: &Rational, b: &Rational, margin: &Rational) -> bool {
        self.intervals.iter().any(|iv| {
            iv.lo.as_ref().map_or(true, |l| a - l >= *margin) && iv.hi.as_ref().map_or(true, |h| h - b >= *margin)
        })
    }
}

impl fmt::Display for Domain1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Compact window `K = [lo, hi]` standing in for the nearstandard points of `Ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactWindow {
    pub lo: Rational,
    pub hi: Rational,
    /// Distance from `K` to `∂Ω`; `None` for the whole line.
    pub margin: Option<Rational>,
}

impl CompactWindow {
    pub fn new(lo: Rational, hi: Rational, domain: &Domain1D) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        if domain.is_whole_line() {
            return Ok(Self { lo, hi, margin: None });
        }
        let iv = domain
            .intervals()
            .iter()
            .find(|i| i.contains(&lo) && i.contains(&hi))
            .ok_or_else(|| Error::Domain(format!("window [{lo}, {hi}] is not inside one interval of {domain}")))?;
        let dl = iv.lo.as_ref().map(|a| &lo - a);
        let dh = iv.hi.as_ref().map(|b| b - &hi);
        let margin = match (dl, dh) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        };
        if margin.as_ref().is_some_and(|m| !m.is_positive()) {
            return Err(Error::Domain("window must keep a positive margin to the boundary".into()));
        }
        Ok(Self { lo, hi, margin })
    }
}
