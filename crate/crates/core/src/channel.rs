//! Link model shared by every engine: link SNRs, conferencing capacities,
//! time shares, rate splits and the AWGN capacity function.
//!
//! SNRs are always stored on the linear scale. Decibels only appear at the
//! boundaries (`from_db`, [`db_to_linear`]). All rates are in bits/s/Hz.

use std::f64::consts::LN_2;

use crate::error::{domain, Result};

/// Relative tolerance for treating two link quantities as equal when the
/// closed-form case tables branch on `=` versus `<`.
pub const EQ_REL_TOL: f64 = 1e-12;

/// `log2(1 + snr)` without input validation. Callers guarantee `snr >= 0`.
#[inline]
pub(crate) fn cap(snr: f64) -> f64 {
    snr.ln_1p() / LN_2
}

/// AWGN capacity `log2(1 + snr)` in bits/s/Hz.
pub fn awgn_capacity(snr: f64) -> Result<f64> {
    check_nonneg("snr", snr)?;
    Ok(cap(snr))
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(domain(format!("dB value must be finite, got {db}")));
    }
    Ok(10f64.powf(db / 10.0))
}

/// Converts a positive linear power ratio to decibels.
pub fn linear_to_db(linear: f64) -> Result<f64> {
    if !(linear.is_finite() && linear > 0.0) {
        return Err(domain(format!(
            "linear value must be finite and positive, got {linear}"
        )));
    }
    Ok(10.0 * linear.log10())
}

/// `x == y` up to [`EQ_REL_TOL`] relative error.
pub fn nearly_equal(x: f64, y: f64) -> bool {
    (x - y).abs() <= EQ_REL_TOL * x.abs().max(y.abs())
}

/// Three-way comparison where near-equal values compare `Equal`.
pub fn compare(x: f64, y: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if nearly_equal(x, y) {
        Ordering::Equal
    } else if x < y {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// The four link SNRs of the diamond channel, linear scale.
///
/// `gamma_i` is source -> relay i, `gtilde_i` is relay i -> destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gtilde1: f64,
    pub gtilde2: f64,
}

impl LinkGains {
    pub fn new(gamma1: f64, gamma2: f64, gtilde1: f64, gtilde2: f64) -> Result<Self> {
        check_nonneg("gamma1", gamma1)?;
        check_nonneg("gamma2", gamma2)?;
        check_nonneg("gtilde1", gtilde1)?;
        check_nonneg("gtilde2", gtilde2)?;
        Ok(Self {
            gamma1,
            gamma2,
            gtilde1,
            gtilde2,
        })
    }

    pub fn from_db(gamma1: f64, gamma2: f64, gtilde1: f64, gtilde2: f64) -> Result<Self> {
        Self::new(
            db_to_linear(gamma1)?,
            db_to_linear(gamma2)?,
            db_to_linear(gtilde1)?,
            db_to_linear(gtilde2)?,
        )
    }

    /// Builds the gains whose link capacities are the given rates,
    /// i.e. `gamma = 2^rate - 1`.
    pub fn from_capacities(up1: f64, up2: f64, down1: f64, down2: f64) -> Result<Self> {
        let inv = |name: &str, r: f64| -> Result<f64> {
            check_nonneg(name, r)?;
            Ok(r.exp2() - 1.0)
        };
        Self::new(
            inv("up1", up1)?,
            inv("up2", up2)?,
            inv("down1", down1)?,
            inv("down2", down2)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.gamma1, self.gamma2, self.gtilde1, self.gtilde2).map(|_| ())
    }

    pub fn rates(&self) -> LinkRates {
        LinkRates {
            up1: cap(self.gamma1),
            up2: cap(self.gamma2),
            down1: cap(self.gtilde1),
            down2: cap(self.gtilde2),
        }
    }

    /// Relabels relay 1 as relay 2 and vice versa.
    pub fn mirrored(&self) -> Self {
        Self {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            gtilde1: self.gtilde2,
            gtilde2: self.gtilde1,
        }
    }
}

/// Capacities `C(gamma_1), C(gamma_2), C(gtilde_1), C(gtilde_2)` of the four links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    pub up1: f64,
    pub up2: f64,
    pub down1: f64,
    pub down2: f64,
}

impl LinkRates {
    pub fn mirrored(&self) -> Self {
        Self {
            up1: self.up2,
            up2: self.up1,
            down1: self.down2,
            down2: self.down1,
        }
    }
}

/// Rates of the two relay-to-relay conferencing links in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConferencingCapacities {
    /// relay 1 -> relay 2
    pub c12: f64,
    /// relay 2 -> relay 1
    pub c21: f64,
}

impl ConferencingCapacities {
    pub fn new(c12: f64, c21: f64) -> Result<Self> {
        check_nonneg("c12", c12)?;
        check_nonneg("c21", c21)?;
        Ok(Self { c12, c21 })
    }

    pub fn symmetric(c: f64) -> Result<Self> {
        Self::new(c, c)
    }

    pub fn none() -> Self {
        Self { c12: 0.0, c21: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.c12, self.c21).map(|_| ())
    }

    pub fn mirrored(&self) -> Self {
        Self {
            c12: self.c21,
            c21: self.c12,
        }
    }
}

/// Fraction of time given to odd (`lambda1`) and even slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeShare {
    lambda1: f64,
}

impl TimeShare {
    pub fn new(lambda1: f64) -> Result<Self> {
        if !(lambda1.is_finite() && (0.0..=1.0).contains(&lambda1)) {
            return Err(domain(format!("lambda1 must lie in [0, 1], got {lambda1}")));
        }
        Ok(Self { lambda1 })
    }

    /// Clamps solver output that overshoots `[0, 1]` by rounding noise.
    pub(crate) fn clamped(lambda1: f64) -> Self {
        Self {
            lambda1: lambda1.clamp(0.0, 1.0),
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        1.0 - self.lambda1
    }

    pub fn mirrored(&self) -> Self {
        Self {
            lambda1: self.lambda2(),
        }
    }
}

/// Rate split of the DF scheme. `r_ij` is the sub-message decoded by relay
/// `i` and delivered to the destination by relay `j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateAllocation {
    pub r11: f64,
    pub r12: f64,
    pub r21: f64,
    pub r22: f64,
}

impl RateAllocation {
    pub fn total(&self) -> f64 {
        self.r11 + self.r12 + self.r21 + self.r22
    }

    pub fn mirrored(&self) -> Self {
        Self {
            r11: self.r22,
            r12: self.r21,
            r21: self.r12,
            r22: self.r11,
        }
    }

    /// Moves the common part of the two conferenced sub-messages onto the
    /// direct ones so that at most one of `r12`, `r21` stays positive.
    /// Feasibility and the total are unchanged.
    pub fn one_sided(&self) -> Self {
        let m = self.r12.min(self.r21).max(0.0);
        Self {
            r11: self.r11 + m,
            r12: self.r12 - m,
            r21: self.r21 - m,
            r22: self.r22 + m,
        }
    }
}
