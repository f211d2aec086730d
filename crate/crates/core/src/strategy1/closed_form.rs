//! Closed-form DF rate under strategy I.
//!
//! With only the relay 1 -> relay 2 link in use, some optimum has one pair of
//! decoding constraints tight, which pins `lambda1` as an affine function of
//! `R12`. The rate then becomes the minimum of two affine functions of `R12`
//! on an interval `[0, k]`, and the case table says where its maximum sits.
//! The relay 2 -> relay 1 subproblem is the same computation on the relabeled
//! channel. The overall rate is the larger of the two.
//!
//! Two transcriptions are kept. The default one is re-derived from the
//! constraints and agrees with the LP. [`printed_closed_form_rate`] follows
//! the as-printed breakpoint formulas to the letter so that their
//! disagreement with the LP can be measured.

use std::cmp::Ordering::{Equal, Greater, Less};

use crate::channel::{cap, compare, ConferencingCapacities, LinkGains, RateAllocation, TimeShare};
use crate::error::Result;

use super::{df_rate_lp, ConferencingLink, DfSolution};

/// Closed form and LP rates further apart than this are flagged.
pub const DISCREPANCY_TOL: f64 = 1e-6;

/// Right ends of the feasible `R12` (resp. `R21`) intervals and the crossing
/// point of the two affine pieces. A non-positive denominator makes the
/// corresponding bound non-binding, reported as `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseBreakpoints {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub ktilde1: f64,
    pub ktilde2: f64,
    pub ktilde3: f64,
}

/// Closed-form result next to the LP it is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedClosedForm {
    pub closed: DfSolution,
    pub lp: DfSolution,
    /// `Some(|closed - lp|)` when it exceeds [`DISCREPANCY_TOL`].
    pub discrepancy: Option<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Crossing of the two affine pieces; `+inf` if they are parallel.
fn crossing(num: f64, den: f64) -> f64 {
    if den != 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Where on `[0, k]` the relay 1 -> relay 2 subproblem peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Peak {
    /// Conferencing does not help.
    Zero,
    /// Both pieces increase.
    Bound,
    /// One piece increases, the other does not; stop at their crossing.
    Crossing,
}

fn peak(gains: &LinkGains) -> Peak {
    let r = gains.rates();
    let prod = compare(r.up1 * r.up2, r.down1 * r.down2);
    match (
        compare(gains.gamma1, gains.gamma2),
        compare(gains.gtilde2, gains.gtilde1),
    ) {
        (Greater, Greater) => Peak::Bound,
        (Greater, _) if prod == Less => Peak::Crossing,
        (Less | Equal, Greater) if prod == Greater => Peak::Crossing,
        _ => Peak::Zero,
    }
}

/// Link whose one-sided subproblem can carry a positive conferenced rate.
pub(super) fn helpful_link(gains: &LinkGains) -> ConferencingLink {
    if peak(gains) != Peak::Zero {
        ConferencingLink::Relay1ToRelay2
    } else if peak(&gains.mirrored()) != Peak::Zero {
        ConferencingLink::Relay2ToRelay1
    } else {
        ConferencingLink::None
    }
}

fn breakpoints_12(gains: &LinkGains, c12: f64) -> (f64, f64, f64) {
    let r = gains.rates();
    let (a1, a2, b1, b2) = (r.up1, r.up2, r.down1, r.down2);
    let k1 = ratio(a1 * c12, a1 + b1 + c12).min(ratio(b1 * b2, a1 + b1 - b2));
    let k2 = ratio(b2 * c12, a2 + b2 + c12).min(ratio(a1 * a2, a2 + b2 - a1));
    let k3 = crossing(b1 * b2 - a1 * a2, a1 - a2 + b1 - b2);
    (k1, k2, k3)
}

pub fn case_breakpoints(gains: &LinkGains, conf: &ConferencingCapacities) -> CaseBreakpoints {
    let (k1, k2, k3) = breakpoints_12(gains, conf.c12);
    let (ktilde1, ktilde2, ktilde3) = breakpoints_12(&gains.mirrored(), conf.c21);
    CaseBreakpoints {
        k1,
        k2,
        k3,
        ktilde1,
        ktilde2,
        ktilde3,
    }
}

/// Candidate operating points of the relay 1 -> relay 2 subproblem, one per
/// tight-constraint branch.
fn candidates_12(gains: &LinkGains, c12: f64) -> Vec<(TimeShare, RateAllocation)> {
    let r = gains.rates();
    let (a1, a2, b1, b2) = (r.up1, r.up2, r.down1, r.down2);
    let (k1, k2, k3) = breakpoints_12(gains, c12);
    let at = |k: f64| match peak(gains) {
        Peak::Zero => 0.0,
        Peak::Bound => k,
        Peak::Crossing => k.min(k3.max(0.0)),
    };
    let mut out = Vec::with_capacity(2);
    if a1 + b1 > 0.0 {
        let r12 = at(k1);
        let share = TimeShare::clamped((b1 + r12) / (a1 + b1));
        let (l1, l2) = (share.lambda1(), share.lambda2());
        let alloc = RateAllocation {
            r11: l2 * b1,
            r12,
            r21: 0.0,
            r22: (l1 * b2 - r12).min(l2 * a2).max(0.0),
        };
        out.push((share, alloc));
    }
    if a2 + b2 > 0.0 {
        let r12 = at(k2);
        let share = TimeShare::clamped((a2 + r12) / (a2 + b2));
        let (l1, l2) = (share.lambda1(), share.lambda2());
        let alloc = RateAllocation {
            r11: (l1 * a1 - r12).min(l2 * b1).max(0.0),
            r12,
            r21: 0.0,
            r22: l2 * a2,
        };
        out.push((share, alloc));
    }
    out
}

/// DF rate under strategy I from the case formulas.
pub fn df_rate_closed_form(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<DfSolution> {
    gains.validate()?;
    conf.validate()?;
    let direct = candidates_12(gains, conf.c12);
    let mirrored = candidates_12(&gains.mirrored(), conf.c21)
        .into_iter()
        .map(|(s, a)| (s.mirrored(), a.mirrored()));
    let mut best: Option<DfSolution> = None;
    for (share, alloc) in direct.into_iter().chain(mirrored) {
        let cand = DfSolution::normalized(alloc, share);
        let better = match &best {
            None => true,
            Some(b) => {
                let tol = 1e-12 * b.rate.abs().max(1.0);
                cand.rate > b.rate + tol
                    || (cand.rate >= b.rate - tol && cand.share.lambda1() < b.share.lambda1())
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.unwrap_or_else(|| {
        DfSolution::normalized(RateAllocation::default(), TimeShare::clamped(0.0))
    }))
}

/// Closed form checked against the LP.
pub fn df_rate_closed_form_checked(
    gains: &LinkGains,
    conf: &ConferencingCapacities,
) -> Result<CheckedClosedForm> {
    let closed = df_rate_closed_form(gains, conf)?;
    let lp = df_rate_lp(gains, conf)?;
    let diff = (closed.rate - lp.rate).abs();
    Ok(CheckedClosedForm {
        closed,
        lp,
        discrepancy: (diff > DISCREPANCY_TOL).then_some(diff),
    })
}

/// The two affine pieces `(slope, intercept)` divided by `den`; returns
/// `-inf` when `den` vanishes so the branch never wins.
fn piece_min(den: f64, lines: [(f64, f64); 2], r: f64) -> f64 {
    if den <= 0.0 {
        return f64::NEG_INFINITY;
    }
    lines
        .iter()
        .map(|(s, b)| b + s * r)
        .fold(f64::INFINITY, f64::min)
        / den
}

/// The as-printed closed form, formula for formula, including its
/// breakpoints for the relay 2 -> relay 1 subproblem and its case list for
/// that subproblem. Rate only.
pub fn printed_closed_form_rate(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<f64> {
    gains.validate()?;
    conf.validate()?;
    let r = gains.rates();
    let (a1, a2, b1, b2) = (r.up1, r.up2, r.down1, r.down2);
    let (g2, gt1, gt2) = (gains.gamma2, gains.gtilde1, gains.gtilde2);
    let (c12, c21) = (conf.c12, conf.c21);

    let r1 = |x: f64| {
        piece_min(
            a1 + b1,
            [(a1 - a2, a1 * b1 + a1 * a2), (b2 - b1, a1 * b1 + b1 * b2)],
            x,
        )
    };
    let r2 = |x: f64| {
        piece_min(
            a2 + b2,
            [(a1 - a2, a2 * b2 + a1 * a2), (b2 - b1, a2 * b2 + b1 * b2)],
            x,
        )
    };
    let rt1 = |x: f64| {
        piece_min(
            a1 + b1,
            [(b1 - b2, a1 * b1 + b1 * b2), (a2 - a1, a1 * b1 + a1 * a2)],
            x,
        )
    };
    let rt2 = |x: f64| {
        piece_min(
            a2 + b2,
            [(b1 - b2, a2 * b2 + b1 * b2), (a2 - a1, a2 * b2 + a1 * a2)],
            x,
        )
    };

    let k1 = ratio(a1 * c12, a1 + b1 + c12).min(ratio(b1 * b2, a1 + b1 - b2));
    let k2 = ratio(b2 * c12, a2 + b2 + c12)
        .min(ratio(b2 * a1, a2 + b2 - a1))
        .min(ratio(b2 * b2, a2));
    let k3 = crossing(a1 * a2 - b1 * b2, b1 - b2 - a1 + a2);
    let kt1 = ratio(b1 * c21, a1 + b1 + c21)
        .min(ratio(cap(gt1 * gt1), cap(2.0 * gt1) + a1))
        .min(ratio(b1 * a2, a1 + b1 + a2));
    let kt2 = ratio(b2 * c12, a2 + b2 + c12).min(ratio(gt1 * gt2, gt2 + g2 - gt1));
    let kt3 = k3;

    let first = compare(gains.gamma1, gains.gamma2);
    let second = compare(gains.gtilde2, gains.gtilde1);
    let prod = compare(a1 * a2, b1 * b2);

    let at_zero_12 = r1(0.0).max(r2(0.0));
    let p11 = match (first, second) {
        (Greater, Greater) => r1(k1).max(r2(k2)),
        (Greater, _) if prod == Less => r1(k1.min(k3)).max(r2(k2.min(k3))),
        (Less | Equal, Greater) if prod == Greater => r1(k1.min(k3)).max(r2(k2.min(k3))),
        _ => at_zero_12,
    };

    let at_zero_21 = rt1(0.0).max(rt2(0.0));
    let at_bound_21 = rt1(kt1).max(rt2(kt2));
    let p12 = match (first, second) {
        (Greater, Greater) => at_zero_21,
        (Greater, _) if prod == Less => at_zero_21,
        (Greater, _) => rt1(kt1.min(kt3)).max(rt2(kt2.min(kt3))),
        (Less | Equal, Greater) if prod == Greater => at_zero_21,
        (Less | Equal, Greater) => at_bound_21,
        _ => at_bound_21,
    };
    Ok(p11.max(p12).max(0.0))
}
