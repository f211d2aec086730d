//! Exact `max_{lambda in [0,1]} min_j (slope_j * lambda + intercept_j)`.
//!
//! The objective is concave and piecewise affine, so its maximum sits on a
//! breakpoint: an endpoint of `[0, 1]` or a pairwise intersection of two
//! lines. Enumerating those candidates is exact and needs at most
//! `2 + m(m-1)/2` evaluations.

use crate::error::{domain, Result};

/// Two candidate values closer than this (relative to `max(1, |v|)`) tie.
const TIE_TOL: f64 = 1e-12;

/// `f(lambda) = slope * lambda + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    /// The line `lambda1 * at_one + (1 - lambda1) * at_zero`.
    pub fn through(at_zero: f64, at_one: f64) -> Self {
        Self {
            slope: at_one - at_zero,
            intercept: at_zero,
        }
    }

    #[inline]
    pub fn eval(&self, lambda: f64) -> f64 {
        self.slope * lambda + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    lines: Vec<Line>,
}

impl AffineFamily {
    pub fn new(lines: Vec<Line>) -> Result<Self> {
        if lines.is_empty() {
            return Err(domain("affine family needs at least one line"));
        }
        if let Some(l) = lines
            .iter()
            .find(|l| !(l.slope.is_finite() && l.intercept.is_finite()))
        {
            return Err(domain(format!("non-finite line coefficients {l:?}")));
        }
        Ok(Self { lines })
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Lower envelope `min_j f_j(lambda)`.
    pub fn envelope(&self, lambda: f64) -> f64 {
        self.lines
            .iter()
            .map(|l| l.eval(lambda))
            .fold(f64::INFINITY, f64::min)
    }

    fn candidates(&self) -> Vec<f64> {
        let mut distinct: Vec<Line> = Vec::with_capacity(self.lines.len());
        for l in &self.lines {
            if !distinct.contains(l) {
                distinct.push(*l);
            }
        }
        let mut out = vec![0.0, 1.0];
        for (i, a) in distinct.iter().enumerate() {
            for b in &distinct[i + 1..] {
                let ds = a.slope - b.slope;
                if ds == 0.0 {
                    continue;
                }
                let x = (b.intercept - a.intercept) / ds;
                if (0.0..=1.0).contains(&x) {
                    out.push(x);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Optimum of the maximin problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximin {
    pub lambda1: f64,
    pub value: f64,
    /// The whole optimal set `[lo, hi]` (the envelope is concave, so the
    /// optimal set is an interval whose ends are breakpoints).
    pub argmax_lo: f64,
    pub argmax_hi: f64,
}

/// Maximizes the lower envelope over `[0, 1]`; ties go to the smallest `lambda1`.
pub fn maximin(family: &AffineFamily) -> Maximin {
    let scored: Vec<(f64, f64)> = family
        .candidates()
        .into_iter()
        .map(|x| (x, family.envelope(x)))
        .collect();
    let best = scored
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOL * best.abs().max(1.0);
    let mut optimal = scored.iter().filter(|&&(_, v)| v >= best - tol);
    // candidates are sorted, so the first optimal one has the smallest lambda
    let &(lo, value) = optimal
        .next()
        .expect("candidate set always contains 0 and 1");
    let hi = optimal.next_back().map_or(lo, |&(x, _)| x);
    Maximin {
        lambda1: lo,
        value,
        argmax_lo: lo,
        argmax_hi: hi,
    }
}
