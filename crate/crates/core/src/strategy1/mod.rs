//! Conferencing strategy I: each conferenced sub-message must be exchanged
//! within the following slot, so conferencing rates are scaled by the time
//! share of that slot.

mod closed_form;

pub use closed_form::{
    case_breakpoints, df_rate_closed_form, df_rate_closed_form_checked, printed_closed_form_rate,
    CaseBreakpoints, CheckedClosedForm, DISCREPANCY_TOL,
};

use std::fmt;

use crate::channel::{
    compare, ConferencingCapacities, LinkGains, LinkRates, RateAllocation, TimeShare,
};
use crate::error::{inconsistent, Result};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::maximin::{maximin, AffineFamily, Line};

/// Conferenced rates at or below this are treated as zero when deciding
/// which link is active.
const ACTIVE_TOL: f64 = 1e-12;

/// Which conferencing link carries traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConferencingLink {
    Relay1ToRelay2,
    Relay2ToRelay1,
    None,
}

impl ConferencingLink {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Relay1ToRelay2 => "relay1_to_relay2",
            Self::Relay2ToRelay1 => "relay2_to_relay1",
            Self::None => "none",
        }
    }

    pub fn mirrored(&self) -> Self {
        match self {
            Self::Relay1ToRelay2 => Self::Relay2ToRelay1,
            Self::Relay2ToRelay1 => Self::Relay1ToRelay2,
            Self::None => Self::None,
        }
    }
}

impl fmt::Display for ConferencingLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An upper bound together with the time share attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    pub share: TimeShare,
}

impl UpperBound {
    pub(crate) fn from_family(lines: Vec<Line>) -> Result<Self> {
        let m = maximin(&AffineFamily::new(lines)?);
        Ok(Self {
            value: m.value,
            share: TimeShare::clamped(m.lambda1),
        })
    }
}

/// Decode-and-forward operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfSolution {
    pub rate: f64,
    pub allocation: RateAllocation,
    pub share: TimeShare,
    pub active_link: ConferencingLink,
}

impl DfSolution {
    /// Normalizes to one-sided conferencing and derives the active link.
    pub(crate) fn normalized(allocation: RateAllocation, share: TimeShare) -> Self {
        let mut a = allocation.one_sided();
        for r in [&mut a.r11, &mut a.r12, &mut a.r21, &mut a.r22] {
            if *r < ACTIVE_TOL {
                *r = 0.0;
            }
        }
        let active_link = if a.r12 > 0.0 {
            ConferencingLink::Relay1ToRelay2
        } else if a.r21 > 0.0 {
            ConferencingLink::Relay2ToRelay1
        } else {
            ConferencingLink::None
        };
        Self {
            rate: a.total(),
            allocation: a,
            share,
            active_link,
        }
    }

    pub fn mirrored(&self) -> Self {
        Self {
            rate: self.rate,
            allocation: self.allocation.mirrored(),
            share: self.share.mirrored(),
            active_link: self.active_link.mirrored(),
        }
    }
}

/// How the conferencing constraints scale with the time share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ConfScaling {
    /// `R_12 <= lambda_2 C_12`, `R_21 <= lambda_1 C_21`
    PerSlot,
    /// `R_12 <= C_12`, `R_21 <= C_21`
    Full,
}

/// The DF rate LP. Variables are ordered `lambda1, lambda2, R11, R12, R21,
/// R22` so that the solver's lexicographic tie-break reports the smallest
/// optimal `lambda1`. A conferenced rate whose link has zero capacity (or
/// that is forced off) is dropped from the program altogether.
#[derive(Debug, Clone)]
pub(crate) struct DfProgram {
    pub rates: LinkRates,
    pub conf: ConferencingCapacities,
    pub scaling: ConfScaling,
    pub allow_r12: bool,
    pub allow_r21: bool,
    /// Extra equality over the full six-variable vector.
    pub extra_eq: Option<([f64; 6], f64)>,
}

impl DfProgram {
    pub fn new(gains: &LinkGains, conf: &ConferencingCapacities, scaling: ConfScaling) -> Self {
        Self {
            rates: gains.rates(),
            conf: *conf,
            scaling,
            allow_r12: true,
            allow_r21: true,
            extra_eq: None,
        }
    }

    pub fn only(mut self, link: ConferencingLink) -> Self {
        self.allow_r12 = link == ConferencingLink::Relay1ToRelay2;
        self.allow_r21 = link == ConferencingLink::Relay2ToRelay1;
        self
    }

    pub fn solve(&self) -> Result<DfSolution> {
        let LinkRates {
            up1: a1,
            up2: a2,
            down1: b1,
            down2: b2,
        } = self.rates;
        let (c12, c21) = (self.conf.c12, self.conf.c21);
        // rows over the full vector [l1, l2, r11, r12, r21, r22]
        let mut rows: Vec<([f64; 6], f64)> = vec![
            ([-a1, 0.0, 1.0, 1.0, 0.0, 0.0], 0.0),
            ([0.0, -a2, 0.0, 0.0, 1.0, 1.0], 0.0),
            ([-b2, 0.0, 0.0, 1.0, 0.0, 1.0], 0.0),
            ([0.0, -b1, 1.0, 0.0, 1.0, 0.0], 0.0),
        ];
        match self.scaling {
            ConfScaling::PerSlot => {
                rows.push(([0.0, -c12, 0.0, 1.0, 0.0, 0.0], 0.0));
                rows.push(([-c21, 0.0, 0.0, 0.0, 1.0, 0.0], 0.0));
            }
            ConfScaling::Full => {
                rows.push(([0.0, 0.0, 0.0, 1.0, 0.0, 0.0], c12));
                rows.push(([0.0, 0.0, 0.0, 0.0, 1.0, 0.0], c21));
            }
        }
        let keep = [
            true,
            true,
            true,
            self.allow_r12 && c12 > 0.0,
            self.allow_r21 && c21 > 0.0,
            true,
        ];
        let project = |v: &[f64; 6]| -> Vec<f64> {
            v.iter()
                .zip(keep)
                .filter_map(|(x, k)| k.then_some(*x))
                .collect()
        };
        let mut prog = LinearProgram::maximize(project(&[0.0, 0.0, 1.0, 1.0, 1.0, 1.0]))
            .all_nonneg()
            .eq(project(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 1.0);
        for (i, (a, b)) in rows.iter().enumerate() {
            // a conferencing row for a dropped variable is vacuous
            if i >= 4 && !keep[i - 1] {
                continue;
            }
            prog = prog.le(project(a), *b);
        }
        if let Some((a, b)) = &self.extra_eq {
            prog = prog.eq(project(a), *b);
        }
        let sol = lp::solve(&prog)?;
        if sol.status != LpStatus::Optimal {
            return Err(inconsistent(format!(
                "DF rate LP reported {:?}",
                sol.status
            )));
        }
        let mut full = [0.0; 6];
        let mut it = sol.point.iter();
        for (slot, k) in full.iter_mut().zip(keep) {
            if k {
                *slot = *it.next().expect("point has one entry per kept variable");
            }
        }
        let alloc = RateAllocation {
            r11: full[2],
            r12: full[3],
            r21: full[4],
            r22: full[5],
        };
        Ok(DfSolution::normalized(alloc, TimeShare::clamped(full[0])))
    }
}

/// Cut-set upper bound on the achievable rate under strategy I.
pub fn upper_bound_i(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<UpperBound> {
    gains.validate()?;
    conf.validate()?;
    let LinkRates {
        up1: a1,
        up2: a2,
        down1: b1,
        down2: b2,
    } = gains.rates();
    let (c12, c21) = (conf.c12, conf.c21);
    UpperBound::from_family(vec![
        Line::through(a2, a1),
        Line::through(b1, b2),
        Line::through(a2 + b1 + c12, c21),
        Line::through(c12, a1 + b2 + c21),
    ])
}

/// Decode-and-forward rate under strategy I, solved as an LP and returned in
/// one-sided form.
pub fn df_rate_lp(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<DfSolution> {
    gains.validate()?;
    conf.validate()?;
    DfProgram::new(gains, conf, ConfScaling::PerSlot).solve()
}

/// The DF LP with only one conferencing link allowed to carry traffic
/// (`ConferencingLink::None` forbids both).
pub fn df_rate_lp_restricted(
    gains: &LinkGains,
    conf: &ConferencingCapacities,
    link: ConferencingLink,
) -> Result<DfSolution> {
    gains.validate()?;
    conf.validate()?;
    DfProgram::new(gains, conf, ConfScaling::PerSlot)
        .only(link)
        .solve()
}

/// Checks that the one-link subproblem for `link` has an optimum where one
/// pair of decoding constraints holds with equality. For relay 1 -> relay 2
/// that is `lambda1 C(g1) - R12 = lambda2 C(gt1)` or
/// `lambda1 C(gt2) - R12 = lambda2 C(g2)`; each is added as an equality and
/// the optimum must survive within `tol`.
pub fn two_tight_constraints_at_optimum(
    gains: &LinkGains,
    conf: &ConferencingCapacities,
    link: ConferencingLink,
    tol: f64,
) -> Result<bool> {
    if link == ConferencingLink::Relay2ToRelay1 {
        return two_tight_constraints_at_optimum(
            &gains.mirrored(),
            &conf.mirrored(),
            ConferencingLink::Relay1ToRelay2,
            tol,
        );
    }
    gains.validate()?;
    conf.validate()?;
    let base =
        DfProgram::new(gains, conf, ConfScaling::PerSlot).only(ConferencingLink::Relay1ToRelay2);
    let target = base.solve()?.rate;
    let LinkRates {
        up1: a1,
        up2: a2,
        down1: b1,
        down2: b2,
    } = gains.rates();
    let r12 = if base.conf.c12 > 0.0 { -1.0 } else { 0.0 };
    for eq in [[a1, -b1, 0.0, r12, 0.0, 0.0], [b2, -a2, 0.0, r12, 0.0, 0.0]] {
        if eq.iter().all(|v| v.abs() < 1e-15) {
            // 0 = 0 holds everywhere
            return Ok(true);
        }
        let mut p = base.clone();
        p.extra_eq = Some((eq, 0.0));
        match p.solve() {
            Ok(s) if (s.rate - target).abs() <= tol => return Ok(true),
            _ => {}
        }
    }
    Ok(false)
}

/// Advises which single conferencing link to provision from the link
/// gains alone.
///
/// The decision table is applied literally, with near-equal values treated
/// as equal. Inputs that fall between its rows (equal first hops with
/// `gt2 < gt1`, or equal second hops with `g1 < g2`, ...) are decided by
/// which one-link subproblem can use its link at all.
pub fn select_conferencing_link(gains: &LinkGains) -> ConferencingLink {
    use std::cmp::Ordering::*;
    let r = gains.rates();
    let first = compare(gains.gamma1, gains.gamma2);
    let second = compare(gains.gtilde2, gains.gtilde1);
    let prod = compare(r.up1 * r.up2, r.down1 * r.down2);
    match (first, second, prod) {
        (Greater, Greater, _) => ConferencingLink::Relay1ToRelay2,
        (Greater, Less | Equal, Less) => ConferencingLink::Relay1ToRelay2,
        (Less | Equal, Greater, Greater) => ConferencingLink::Relay1ToRelay2,
        (Less, Less, _) => ConferencingLink::Relay2ToRelay1,
        (Greater, Less | Equal, Greater) => ConferencingLink::Relay2ToRelay1,
        (Less | Equal, Greater, Less) => ConferencingLink::Relay2ToRelay1,
        (Equal, Equal, _) => ConferencingLink::None,
        (_, _, Equal) => ConferencingLink::None,
        // (Equal, Less, _) and (Less, Equal, _)
        _ => closed_form::helpful_link(gains),
    }
}

/// `max_lambda min{ lambda1 C(g1) + lambda2 C(g2), lambda2 C(gt1) + lambda1 C(gt2) }`,
/// the limit of the strategy-I bound when the conferencing terms no longer bind.
pub fn asymptotic_df_limit(gains: &LinkGains) -> Result<UpperBound> {
    gains.validate()?;
    let r = gains.rates();
    UpperBound::from_family(vec![
        Line::through(r.up2, r.up1),
        Line::through(r.down1, r.down2),
    ])
}
