//! Conferencing strategy II: a conferenced sub-message may use the
//! conferencing link over two slots, so the conferencing constraints are not
//! scaled by the time share.

use std::cmp::Ordering::{Greater, Less};

use crate::channel::{compare, ConferencingCapacities, LinkGains, LinkRates};
use crate::error::Result;
use crate::maximin::{maximin, AffineFamily, Line};
use crate::strategy1::{upper_bound_i, ConfScaling, DfProgram, DfSolution, UpperBound};

/// Tolerance for declaring that the DF rate meets an upper bound.
pub const ACHIEVES_TOL: f64 = 1e-6;

/// Cut-set upper bound under strategy II.
pub fn upper_bound_ii(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<UpperBound> {
    gains.validate()?;
    conf.validate()?;
    let LinkRates {
        up1: a1,
        up2: a2,
        down1: b1,
        down2: b2,
    } = gains.rates();
    let c = conf.c12 + conf.c21;
    UpperBound::from_family(vec![
        Line::through(a2, a1),
        Line::through(b1, b2),
        Line::through(a2 + b1 + c, c),
        Line::through(c, a1 + b2 + c),
    ])
}

/// Decode-and-forward rate under strategy II, in one-sided form.
pub fn df_rate_ii(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<DfSolution> {
    gains.validate()?;
    conf.validate()?;
    DfProgram::new(gains, conf, ConfScaling::Full).solve()
}

/// Whether strategy-II DF meets the strategy-II bound at these capacities.
pub fn achieves_upper_bound_ii(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<bool> {
    let df = df_rate_ii(gains, conf)?.rate;
    let ub = upper_bound_ii(gains, conf)?.value;
    Ok(ub - df <= ACHIEVES_TOL)
}

/// Whether strategy-II DF with `C12 = C21 = c` meets the strategy-I bound.
pub fn symmetric_df_meets_bound_i(gains: &LinkGains, c: f64) -> Result<bool> {
    let conf = ConferencingCapacities::symmetric(c)?;
    let df = df_rate_ii(gains, &conf)?.rate;
    let ub = upper_bound_i(gains, &conf)?.value;
    Ok((df - ub).abs() <= ACHIEVES_TOL)
}

/// Channel-condition rows of the minimum-conferencing table, checked in
/// order; the first match wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdCase {
    /// `g1 > g2`, `gt2 > gt1`
    Row1,
    /// `g1 <= g2`, `gt2 <= gt1`
    Row2,
    /// `g1 > g2`, `gt1 <= gt2`, `gt2 >= g1`
    Row3,
    /// `g1 <= g2`, `gt1 > gt2`, `gt2 <= g1`
    Row4,
    /// `g1 > g2`, `gt1 > gt2`, `g1 > gt2`
    Row5,
    /// `g1 <= g2`, `gt1 < gt2`, `g1 < gt2`
    Row6,
    /// None of the rows applies (e.g. `g2 < g1 <= gt2 < gt1`).
    Uncovered,
}

impl ThresholdCase {
    pub fn classify(gains: &LinkGains) -> Self {
        let (g1, g2, gt1, gt2) = (gains.gamma1, gains.gamma2, gains.gtilde1, gains.gtilde2);
        let gt = |x, y| compare(x, y) == Greater;
        let le = |x, y| compare(x, y) != Greater;
        let lt = |x, y| compare(x, y) == Less;
        let ge = |x, y| compare(x, y) != Less;
        if gt(g1, g2) && gt(gt2, gt1) {
            Self::Row1
        } else if le(g1, g2) && le(gt2, gt1) {
            Self::Row2
        } else if gt(g1, g2) && le(gt1, gt2) && ge(gt2, g1) {
            Self::Row3
        } else if le(g1, g2) && gt(gt1, gt2) && le(gt2, g1) {
            Self::Row4
        } else if gt(g1, g2) && gt(gt1, gt2) && gt(g1, gt2) {
            Self::Row5
        } else if le(g1, g2) && lt(gt1, gt2) && lt(g1, gt2) {
            Self::Row6
        } else {
            Self::Uncovered
        }
    }
}

/// Minimum total conferencing rate for strategy-II DF to meet its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// Two-term bound (conferencing terms removed).
    pub ctilde_upper: f64,
    /// Maximizer of the two-term bound used for the threshold: among all
    /// maximizers, the one where `g` is largest.
    pub lambda_star: f64,
    /// `g(lambda_star) = min{ lambda2 (C(g2) + C(gt1)), lambda1 (C(g1) + C(gt2)) }`.
    pub g_value: f64,
    /// `max(0, ctilde_upper - g_value)`.
    pub min_conf_sum: f64,
    pub case_id: ThresholdCase,
    /// The table's closed-form entry for `case_id`, NaN when uncovered.
    pub table_value: f64,
}

impl ThresholdReport {
    /// The table entry disagrees with the computed threshold.
    pub fn table_mismatch(&self, tol: f64) -> bool {
        !(self.table_value - self.min_conf_sum).abs().le(&tol)
    }
}

/// `g(lambda1)` for the given link rates.
pub fn g_func(rates: &LinkRates, lambda1: f64) -> f64 {
    let l2 = 1.0 - lambda1;
    (l2 * (rates.up2 + rates.down1)).min(lambda1 * (rates.up1 + rates.down2))
}

pub fn min_conferencing_for_capacity(gains: &LinkGains) -> Result<ThresholdReport> {
    gains.validate()?;
    let r = gains.rates();
    let (a1, a2, b1, b2) = (r.up1, r.up2, r.down1, r.down2);
    let m = maximin(&AffineFamily::new(vec![
        Line::through(a2, a1),
        Line::through(b1, b2),
    ])?);
    // g is a tent peaking where its two arms cross, so its maximum over the
    // optimal interval is that crossing clamped into the interval
    let (s1, s2) = (a1 + b2, a2 + b1);
    let peak = if s1 + s2 > 0.0 {
        s2 / (s1 + s2)
    } else {
        m.argmax_lo
    };
    let lambda_star = peak.clamp(m.argmax_lo, m.argmax_hi);
    let g_value = g_func(&r, lambda_star);
    let min_conf_sum = (m.value - g_value).max(0.0);

    let case_id = ThresholdCase::classify(gains);
    let den = b2 - b1 - a1 + a2;
    let table_value = match case_id {
        ThresholdCase::Row1 => a1.min(b2),
        ThresholdCase::Row2 => a2.min(b1),
        ThresholdCase::Row3 => b2,
        ThresholdCase::Row4 => a1,
        ThresholdCase::Row5 | ThresholdCase::Row6 if den != 0.0 => {
            let lambda0 = ((a2 - b1) / den).clamp(0.0, 1.0);
            (a2 * b2 - a1 * b1) / den - g_func(&r, lambda0)
        }
        ThresholdCase::Row5 | ThresholdCase::Row6 => min_conf_sum,
        ThresholdCase::Uncovered => f64::NAN,
    };
    Ok(ThresholdReport {
        ctilde_upper: m.value,
        lambda_star,
        g_value,
        min_conf_sum,
        case_id,
        table_value,
    })
}

/// Smallest `c` such that strategy-II DF with `C12 = C21 = c` reaches the
/// conferencing-free capacity (the two-term bound), found by bisection to
/// within `tol`. DF grows with `c`, so the bisection is sound; meeting the
/// strategy-II bound is not monotone in `c` (it holds trivially at 0).
pub fn min_symmetric_conferencing(gains: &LinkGains, tol: f64) -> Result<f64> {
    gains.validate()?;
    let r = gains.rates();
    let target = maximin(&AffineFamily::new(vec![
        Line::through(r.up2, r.up1),
        Line::through(r.down1, r.down2),
    ])?)
    .value;
    let slack = 1e-12 * target.max(1.0);
    let ok = |c: f64| -> Result<bool> {
        Ok(df_rate_ii(gains, &ConferencingCapacities::symmetric(c)?)?.rate >= target - slack)
    };
    if ok(0.0)? {
        return Ok(0.0);
    }
    let mut hi = r.up1.max(r.up2).max(r.down1).max(r.down2).max(1.0);
    let mut lo = 0.0;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(crate::error::inconsistent(
                "strategy-II DF never reaches the two-term bound under symmetric conferencing",
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Whether a total conferencing rate `sum`, split as `C12 = frac * sum` and
/// `C21 = (1 - frac) * sum`, lets strategy-II DF meet its bound.
pub fn split_suffices(gains: &LinkGains, sum: f64, frac: f64) -> Result<bool> {
    let conf = ConferencingCapacities::new(frac * sum, (1.0 - frac) * sum)?;
    achieves_upper_bound_ii(gains, &conf)
}
