//! Amplify-and-forward under conferencing strategy I.
//!
//! Each relay forwards a linear combination of what it heard from the source
//! and what the other relay passed over the conferencing link. The rate
//! depends on the combining coefficients only through their squared
//! magnitudes `p_ij` (signal received at relay `i`, transmitted by relay `j`),
//! and the per-relay power constraints are linear in them.
//!
//! The sum-rate objective is not concave in general, so [`maximize_af`] runs
//! projected gradient ascent from several starts and keeps the best.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::channel::{cap, ConferencingCapacities, LinkGains};
use crate::error::{domain, inconsistent, Result};
use crate::lp::{self, LinearProgram, LpStatus};

/// Slack allowed on the power constraints.
pub const POWER_TOL: f64 = 1e-9;

/// Effective noise variances of the two conferencing links. A link of zero
/// capacity carries nothing and is marked with `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConferencingNoise {
    /// relay 1 -> relay 2 (relay 1's received signal, seen at relay 2)
    pub sigma2_12: f64,
    /// relay 2 -> relay 1
    pub sigma2_21: f64,
}

impl ConferencingNoise {
    pub fn new(sigma2_12: f64, sigma2_21: f64) -> Result<Self> {
        for v in [sigma2_12, sigma2_21] {
            if v.is_nan() || v < 0.0 {
                return Err(domain(format!("noise variance must be >= 0, got {v}")));
            }
        }
        Ok(Self {
            sigma2_12,
            sigma2_21,
        })
    }

    pub fn link_12_open(&self) -> bool {
        self.sigma2_12.is_finite()
    }

    pub fn link_21_open(&self) -> bool {
        self.sigma2_21.is_finite()
    }
}

/// Quantization noise of a conferencing link forwarding a signal of power
/// `gamma + 1` at rate `c` over half the slot.
fn link_noise(gamma: f64, c: f64) -> f64 {
    if c == 0.0 {
        return f64::INFINITY;
    }
    (gamma + 1.0) / (0.5 * c * LN_2).exp_m1()
}

pub fn conferencing_noise(
    gains: &LinkGains,
    conf: &ConferencingCapacities,
) -> Result<ConferencingNoise> {
    gains.validate()?;
    conf.validate()?;
    Ok(ConferencingNoise {
        sigma2_12: link_noise(gains.gamma1, conf.c12),
        sigma2_21: link_noise(gains.gamma2, conf.c21),
    })
}

/// Squared combining magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AfCoefficients {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl AfCoefficients {
    /// Transmit powers of relay 1 and relay 2.
    pub fn powers(&self, gains: &LinkGains, noise: &ConferencingNoise) -> (f64, f64) {
        let cross = |p: f64, s: f64| if p == 0.0 { 0.0 } else { p * s };
        (
            self.p11 * (gains.gamma1 + 1.0) + cross(self.p21, gains.gamma2 + 1.0 + noise.sigma2_21),
            self.p22 * (gains.gamma2 + 1.0) + cross(self.p12, gains.gamma1 + 1.0 + noise.sigma2_12),
        )
    }

    pub fn is_feasible(&self, gains: &LinkGains, noise: &ConferencingNoise) -> bool {
        let all = [self.p11, self.p12, self.p21, self.p22];
        if !all.iter().all(|p| p.is_finite() && *p >= 0.0) {
            return false;
        }
        if (!noise.link_12_open() && self.p12 > 0.0) || (!noise.link_21_open() && self.p21 > 0.0) {
            return false;
        }
        let (q1, q2) = self.powers(gains, noise);
        q1 <= 1.0 + POWER_TOL && q2 <= 1.0 + POWER_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfSolution {
    pub rate: f64,
    pub coeffs: AfCoefficients,
    /// Rates of the odd-slot and even-slot messages.
    pub per_message: (f64, f64),
    /// False when the ascent hit its iteration cap; the point is then the
    /// best incumbent.
    pub converged: bool,
}

impl AfSolution {
    fn at(gains: &LinkGains, noise: &ConferencingNoise, coeffs: AfCoefficients) -> Self {
        let (r1, r2) = objective(gains, noise, &coeffs);
        Self {
            rate: r1 + r2,
            coeffs,
            per_message: (r1, r2),
            converged: true,
        }
    }
}

/// Received SNR terms of one message: direct part, conferenced part and the
/// pieces of the conferenced fraction needed for its gradient.
struct Snr {
    direct: f64,
    cross: f64,
    cross_num: f64,
    cross_den: f64,
}

/// SNR of the message decoded at relay `i` (own gain `g`, forward gain `gt`),
/// conferenced to relay `j` (forward gain `gt_j`, source gain `g_j`).
#[allow(clippy::too_many_arguments)]
fn message_snr(
    p_own: f64,
    p_cross: f64,
    p_next: f64,
    g: f64,
    gt: f64,
    g_j: f64,
    gt_j: f64,
    sigma2: f64,
) -> Snr {
    let direct = p_own * g * gt / (1.0 + p_own * gt);
    let cross_den = if p_cross == 0.0 {
        p_next * gt_j * (g_j + 1.0) + 1.0
    } else {
        p_cross * gt_j * (1.0 + sigma2) + p_next * gt_j * (g_j + 1.0) + 1.0
    };
    let cross_num = p_cross * g * gt_j;
    let cross = if p_cross == 0.0 {
        0.0
    } else {
        cross_num / cross_den
    };
    Snr {
        direct,
        cross,
        cross_num,
        cross_den,
    }
}

fn snrs(gains: &LinkGains, noise: &ConferencingNoise, c: &AfCoefficients) -> (Snr, Snr) {
    let LinkGains {
        gamma1: g1,
        gamma2: g2,
        gtilde1: gt1,
        gtilde2: gt2,
    } = *gains;
    (
        message_snr(c.p11, c.p12, c.p22, g1, gt1, g2, gt2, noise.sigma2_12),
        message_snr(c.p22, c.p21, c.p11, g2, gt2, g1, gt1, noise.sigma2_21),
    )
}

fn objective(gains: &LinkGains, noise: &ConferencingNoise, c: &AfCoefficients) -> (f64, f64) {
    let (s1, s2) = snrs(gains, noise, c);
    (
        0.5 * cap(s1.direct + s1.cross),
        0.5 * cap(s2.direct + s2.cross),
    )
}

/// Per-message AF rates `(R1, R2)`.
pub fn af_objective(
    gains: &LinkGains,
    noise: &ConferencingNoise,
    coeffs: &AfCoefficients,
) -> Result<(f64, f64)> {
    gains.validate()?;
    if !coeffs.is_feasible(gains, noise) {
        return Err(domain(format!("infeasible AF coefficients {coeffs:?}")));
    }
    Ok(objective(gains, noise, coeffs))
}

/// Gradient of `R1 + R2` with respect to `(p11, p12, p21, p22)`. Components
/// of a closed conferencing link are zero.
pub fn af_gradient(gains: &LinkGains, noise: &ConferencingNoise, c: &AfCoefficients) -> [f64; 4] {
    let LinkGains {
        gamma1: g1,
        gamma2: g2,
        gtilde1: gt1,
        gtilde2: gt2,
    } = *gains;
    let (s1, s2) = snrs(gains, noise, c);
    // d R / d snr
    let k1 = 0.5 / (LN_2 * (1.0 + s1.direct + s1.cross));
    let k2 = 0.5 / (LN_2 * (1.0 + s2.direct + s2.cross));
    let d_direct = |p: f64, g: f64, gt: f64| g * gt / (1.0 + p * gt).powi(2);

    // relay 1's message: cross term N1 / D1 with N1 = p12 g1 gt2,
    // D1 = p12 gt2 (1 + s12) + p22 gt2 (g2 + 1) + 1
    let (dp12, dp22_from_1) = if noise.link_12_open() {
        let d2 = s1.cross_den * s1.cross_den;
        (
            g1 * gt2 * (c.p22 * gt2 * (g2 + 1.0) + 1.0) / d2,
            -s1.cross_num * gt2 * (g2 + 1.0) / d2,
        )
    } else {
        (0.0, 0.0)
    };
    let (dp21, dp11_from_2) = if noise.link_21_open() {
        let d2 = s2.cross_den * s2.cross_den;
        (
            g2 * gt1 * (c.p11 * gt1 * (g1 + 1.0) + 1.0) / d2,
            -s2.cross_num * gt1 * (g1 + 1.0) / d2,
        )
    } else {
        (0.0, 0.0)
    };
    [
        k1 * d_direct(c.p11, g1, gt1) + k2 * dp11_from_2,
        k1 * dp12,
        k2 * dp21,
        k2 * d_direct(c.p22, g2, gt2) + k1 * dp22_from_1,
    ]
}

/// Coordinates scaled so that each relay's power budget is
/// `own + cross <= 1`: `u = [u11, u21, u22, u12]` with relay 1 owning the
/// first pair and relay 2 the second.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    gains: LinkGains,
    noise: ConferencingNoise,
    /// multipliers turning u into p, in the order of `u`
    scale: [f64; 4],
    open_21: bool,
    open_12: bool,
}

impl Scaled {
    fn new(gains: &LinkGains, noise: &ConferencingNoise) -> Self {
        let g = gains;
        Self {
            gains: *g,
            noise: *noise,
            scale: [
                1.0 / (g.gamma1 + 1.0),
                1.0 / (g.gamma2 + 1.0 + noise.sigma2_21),
                1.0 / (g.gamma2 + 1.0),
                1.0 / (g.gamma1 + 1.0 + noise.sigma2_12),
            ],
            open_21: noise.link_21_open(),
            open_12: noise.link_12_open(),
        }
    }

    fn coeffs(&self, u: &[f64; 4]) -> AfCoefficients {
        AfCoefficients {
            p11: u[0] * self.scale[0],
            p21: if self.open_21 {
                u[1] * self.scale[1]
            } else {
                0.0
            },
            p22: u[2] * self.scale[2],
            p12: if self.open_12 {
                u[3] * self.scale[3]
            } else {
                0.0
            },
        }
    }

    fn value(&self, u: &[f64; 4]) -> f64 {
        let (r1, r2) = objective(&self.gains, &self.noise, &self.coeffs(u));
        r1 + r2
    }

    fn gradient(&self, u: &[f64; 4]) -> [f64; 4] {
        let g = af_gradient(&self.gains, &self.noise, &self.coeffs(u));
        [
            g[0] * self.scale[0],
            if self.open_21 {
                g[2] * self.scale[1]
            } else {
                0.0
            },
            g[3] * self.scale[2],
            if self.open_12 {
                g[1] * self.scale[3]
            } else {
                0.0
            },
        ]
    }

    fn project(&self, u: &[f64; 4]) -> [f64; 4] {
        let (a, b) = project_pair(u[0], u[1], self.open_21);
        let (c, d) = project_pair(u[2], u[3], self.open_12);
        [a, b, c, d]
    }
}

/// Euclidean projection onto `{(x, y) >= 0, x + y <= 1}`, or onto
/// `[0, 1] x {0}` when the cross coordinate is unavailable.
fn project_pair(x: f64, y: f64, cross_open: bool) -> (f64, f64) {
    if !cross_open {
        return (x.clamp(0.0, 1.0), 0.0);
    }
    let (cx, cy) = (x.max(0.0), y.max(0.0));
    if cx + cy <= 1.0 {
        return (cx, cy);
    }
    let t = 0.5 * (x + y - 1.0);
    let (px, py) = (x - t, y - t);
    if px < 0.0 {
        (0.0, 1.0)
    } else if py < 0.0 {
        (1.0, 0.0)
    } else {
        (px, py)
    }
}

const MAX_ITERS: usize = 100_000;
const REL_IMPROVEMENT: f64 = 1e-10;
const STALL_ITERS: usize = 20;
const ARMIJO: f64 = 1e-4;

/// Outcome of one projected-gradient run.
#[derive(Debug, Clone, Copy)]
struct Ascent {
    u: [f64; 4],
    value: f64,
    converged: bool,
}

fn ascend(s: &Scaled, start: [f64; 4]) -> Ascent {
    let mut u = s.project(&start);
    let mut value = s.value(&u);
    let mut step = 1.0;
    let mut stall = 0;
    for _ in 0..MAX_ITERS {
        let g = s.gradient(&u);
        let mut accepted = None;
        while step > 1e-14 {
            let trial = s.project(&std::array::from_fn(|i| u[i] + step * g[i]));
            let moved: f64 = (0..4).map(|i| g[i] * (trial[i] - u[i])).sum();
            let v = s.value(&trial);
            if moved >= 0.0 && v >= value + ARMIJO * moved {
                accepted = Some((trial, v));
                break;
            }
            step *= 0.5;
        }
        let Some((next, v)) = accepted else {
            // no ascent direction left
            return Ascent {
                u,
                value,
                converged: true,
            };
        };
        let improvement = (v - value) / value.abs().max(1e-300);
        u = next;
        value = v;
        step = (step * 2.0).min(1e6);
        if improvement < REL_IMPROVEMENT {
            stall += 1;
            if stall >= STALL_ITERS {
                return Ascent {
                    u,
                    value,
                    converged: true,
                };
            }
        } else {
            stall = 0;
        }
    }
    Ascent {
        u,
        value,
        converged: false,
    }
}

/// Points on the full-power boundary of both relays. Scaling a relay's pair
/// of coefficients up never lowers either message's SNR, so some optimum
/// uses full power at each relay.
fn boundary_point(t1: f64, t2: f64) -> [f64; 4] {
    [1.0 - t1, t1, 1.0 - t2, t2]
}

const ORACLE_SEEDS: usize = 8;
const ORACLE_ZOOMS: usize = 2;
/// Coarse scan resolution used to seed the ascent.
const SEED_GRID: usize = 11;

pub fn maximize_af(gains: &LinkGains, conf: &ConferencingCapacities) -> Result<AfSolution> {
    let noise = conferencing_noise(gains, conf)?;
    maximize_af_with_noise(gains, &noise)
}

/// [`maximize_af`] for given conferencing noise variances.
pub fn maximize_af_with_noise(gains: &LinkGains, noise: &ConferencingNoise) -> Result<AfSolution> {
    gains.validate()?;
    let s = Scaled::new(gains, noise);
    let mut starts = vec![
        boundary_point(0.0, 0.0),
        boundary_point(1.0, 1.0),
        boundary_point(0.0, 1.0),
        boundary_point(1.0, 0.0),
        [0.25; 4],
    ];
    // best point of a coarse boundary scan
    let n = SEED_GRID - 1;
    let seed = (0..=n)
        .flat_map(|i| {
            (0..=n).map(move |j| boundary_point(i as f64 / n as f64, j as f64 / n as f64))
        })
        .map(|u| (s.value(&s.project(&u)), u))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, u)| u)
        .expect("scan is nonempty");
    starts.push(seed);

    let mut best: Option<Ascent> = None;
    for start in starts {
        let run = ascend(&s, start);
        if best.is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    if !best.value.is_finite() {
        return Err(inconsistent("AF objective is not finite at the optimum"));
    }
    let coeffs = s.coeffs(&best.u);
    Ok(AfSolution {
        converged: best.converged,
        ..AfSolution::at(gains, noise, coeffs)
    })
}

/// Brute-force maximizer over the full-power boundary: a
/// `points x points` grid over the two cross fractions, then two zoomed
/// grids around each of the best coarse local maxima. A closed
/// conferencing link removes its dimension.
pub fn af_grid_oracle(gains: &LinkGains, noise: &ConferencingNoise, points: usize) -> AfSolution {
    let s = Scaled::new(gains, noise);
    let points = points.max(2);
    let axis = |open: bool, lo: f64, hi: f64| -> Vec<f64> {
        if !open {
            return vec![0.0];
        }
        (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect()
    };
    let xs = axis(s.open_21, 0.0, 1.0);
    let ys = axis(s.open_12, 0.0, 1.0);
    let (nx, ny) = (xs.len(), ys.len());
    let vals: Vec<f64> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .map(|(x, y)| s.value(&boundary_point(x, y)))
        .collect();

    // Peaks near the simplex edges can be narrower than the coarse spacing,
    // so every coarse local maximum among the best few gets its own zoom.
    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = vals[i * ny + j];
            let is_peak = (i.saturating_sub(1)..(i + 2).min(nx))
                .all(|p| (j.saturating_sub(1)..(j + 2).min(ny)).all(|q| vals[p * ny + q] <= v));
            if is_peak {
                seeds.push((v, i, j));
            }
        }
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    seeds.truncate(ORACLE_SEEDS);

    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    let step = 1.0 / (points - 1) as f64;
    for &(_, i, j) in &seeds {
        let (mut x, mut y) = (xs[i], ys[j]);
        let (mut w1, mut w2) = (step, step);
        let mut local = (s.value(&boundary_point(x, y)), boundary_point(x, y));
        for _ in 0..ORACLE_ZOOMS {
            for &px in &axis(s.open_21, (x - w1).max(0.0), (x + w1).min(1.0)) {
                for &py in &axis(s.open_12, (y - w2).max(0.0), (y + w2).min(1.0)) {
                    let u = boundary_point(px, py);
                    let v = s.value(&u);
                    if v > local.0 {
                        local = (v, u);
                    }
                }
            }
            (x, y) = (local.1[1], local.1[3]);
            w1 *= 2.0 / (points - 1) as f64;
            w2 *= 2.0 / (points - 1) as f64;
        }
        if local.0 > best.0 {
            best = local;
        }
    }
    AfSolution::at(gains, noise, s.coeffs(&best.1))
}

/// Which coefficients the low-SNR solution switches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowSnrCase {
    /// Each relay forwards only its own signal.
    Direct,
    /// Both relays forward relay 2's signal and relay 1 drops its own.
    BothForwardRelay2,
    /// Both relays forward relay 1's signal and relay 2 drops its own.
    BothForwardRelay1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowSnrSolution {
    pub case: LowSnrCase,
    pub solution: AfSolution,
    /// Value of the linearized objective `1/2 sum p_ij g_i gt_j`.
    pub linear_value: f64,
}

/// Per-relay SNR ratios compared by the low-SNR case split:
/// relay 1 compares `g1/(g1+1)` with `g2/(g2+1+s21)`, relay 2 compares
/// `g2/(g2+1)` with `g1/(g1+1+s12)`. A closed link gives 0 for its cross
/// ratio.
fn low_snr_ratios(gains: &LinkGains, noise: &ConferencingNoise) -> ((f64, f64), (f64, f64)) {
    let (g1, g2) = (gains.gamma1, gains.gamma2);
    let cross = |g: f64, s: f64| {
        if s.is_finite() {
            g / (g + 1.0 + s)
        } else {
            0.0
        }
    };
    (
        (g1 / (g1 + 1.0), cross(g2, noise.sigma2_21)),
        (g2 / (g2 + 1.0), cross(g1, noise.sigma2_12)),
    )
}

fn linear_value(gains: &LinkGains, c: &AfCoefficients) -> f64 {
    let LinkGains {
        gamma1: g1,
        gamma2: g2,
        gtilde1: gt1,
        gtilde2: gt2,
    } = *gains;
    0.5 * (c.p11 * g1 * gt1 + c.p12 * g1 * gt2 + c.p22 * g2 * gt2 + c.p21 * g2 * gt1)
}

/// Closed-form optimum of the low-SNR linearization: each relay spends its
/// whole budget on whichever of its two signals has the higher SNR.
pub fn af_low_snr(gains: &LinkGains, noise: &ConferencingNoise) -> Result<LowSnrSolution> {
    gains.validate()?;
    let ((own1, cross1), (own2, cross2)) = low_snr_ratios(gains, noise);
    let (g1, g2) = (gains.gamma1, gains.gamma2);
    let relay1_cross = own1 < cross1;
    let relay2_cross = own2 < cross2;
    let (case, coeffs) = match (relay1_cross, relay2_cross) {
        (false, false) => (
            LowSnrCase::Direct,
            AfCoefficients {
                p11: 1.0 / (g1 + 1.0),
                p22: 1.0 / (g2 + 1.0),
                ..Default::default()
            },
        ),
        (true, false) => (
            LowSnrCase::BothForwardRelay2,
            AfCoefficients {
                p22: 1.0 / (g2 + 1.0),
                p21: 1.0 / (g2 + 1.0 + noise.sigma2_21),
                ..Default::default()
            },
        ),
        (false, true) => (
            LowSnrCase::BothForwardRelay1,
            AfCoefficients {
                p11: 1.0 / (g1 + 1.0),
                p12: 1.0 / (g1 + 1.0 + noise.sigma2_12),
                ..Default::default()
            },
        ),
        (true, true) => {
            return Err(inconsistent(format!(
                "both relays prefer the conferenced signal: {own1} < {cross1} and {own2} < {cross2}"
            )))
        }
    };
    Ok(LowSnrSolution {
        case,
        solution: AfSolution::at(gains, noise, coeffs),
        linear_value: linear_value(gains, &coeffs),
    })
}

/// The low-SNR linearization solved as an LP over `(p11, p12, p21, p22)`.
pub fn low_snr_lp(gains: &LinkGains, noise: &ConferencingNoise) -> Result<(f64, AfCoefficients)> {
    gains.validate()?;
    let LinkGains {
        gamma1: g1,
        gamma2: g2,
        gtilde1: gt1,
        gtilde2: gt2,
    } = *gains;
    let open = [true, noise.link_12_open(), noise.link_21_open(), true];
    let keep = |v: [f64; 4]| -> Vec<f64> {
        v.iter()
            .zip(open)
            .filter_map(|(x, o)| o.then_some(*x))
            .collect()
    };
    let s12 = if open[1] {
        g1 + 1.0 + noise.sigma2_12
    } else {
        0.0
    };
    let s21 = if open[2] {
        g2 + 1.0 + noise.sigma2_21
    } else {
        0.0
    };
    let prog = LinearProgram::maximize(keep([
        0.5 * g1 * gt1,
        0.5 * g1 * gt2,
        0.5 * g2 * gt1,
        0.5 * g2 * gt2,
    ]))
    .all_nonneg()
    .le(keep([g1 + 1.0, 0.0, s21, 0.0]), 1.0)
    .le(keep([0.0, s12, 0.0, g2 + 1.0]), 1.0);
    let sol = lp::solve(&prog)?;
    if sol.status != LpStatus::Optimal {
        return Err(inconsistent(format!(
            "low-SNR LP reported {:?}",
            sol.status
        )));
    }
    let mut full = [0.0; 4];
    let mut it = sol.point.iter();
    for (slot, o) in full.iter_mut().zip(open) {
        if o {
            *slot = *it.next().expect("one entry per kept variable");
        }
    }
    Ok((
        sol.value,
        AfCoefficients {
            p11: full[0],
            p12: full[1],
            p21: full[2],
            p22: full[3],
        },
    ))
}

/// Hessian of `z = x / (x + a y + b)` with respect to `(x, y)`.
pub fn ratio_hessian(a: f64, b: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let d = x + a * y + b;
    let d3 = d * d * d;
    let off = (a * x - a * a * y - a * b) / d3;
    [
        [(-2.0 * a * y - 2.0 * b) / d3, off],
        [off, 2.0 * a * a * x / d3],
    ]
}

/// Result of the concavity probe.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConcavityReport {
    pub hessian_samples: usize,
    /// Points where the leading minor is not negative.
    pub minor_violations: usize,
    /// Points where the determinant is positive.
    pub det_violations: usize,
    pub midpoint_samples: usize,
    /// Segments whose midpoint value lies below the chord.
    pub midpoint_violations: usize,
    /// Largest chord excess seen, in bits/s/Hz.
    pub worst_midpoint_gap: f64,
    /// Endpoints of the worst segment.
    pub worst_segment: Option<(AfCoefficients, AfCoefficients)>,
}

impl ConcavityReport {
    pub fn hessian_conditions_hold(&self) -> bool {
        self.minor_violations == 0 && self.det_violations == 0
    }
}

fn random_feasible<R: Rng>(rng: &mut R, s: &Scaled) -> [f64; 4] {
    let mut pair = |open: bool| -> (f64, f64) {
        // uniform on the triangle own + cross <= 1
        let (x, y): (f64, f64) = (rng.gen(), rng.gen());
        if !open {
            return (x, 0.0);
        }
        if x + y > 1.0 {
            (1.0 - x, 1.0 - y)
        } else {
            (x, y)
        }
    };
    let (a, b) = pair(s.open_21);
    let (c, d) = pair(s.open_12);
    [a, b, c, d]
}

/// Samples the cross-term Hessian conditions and midpoint concavity of
/// `R1 + R2` at random feasible points.
///
/// For the Hessian, each sample normalizes the cross term of message 1 to
/// `x / (x + a y + b)` with `x = p12`, `y = p22`, `a = (g2 + 1) / (1 + s12)`
/// and `b = 1 / (gt2 (1 + s12))`, and records whether the leading minor is
/// negative and the determinant non-positive (within `1e-8`).
pub fn check_concavity<R: Rng>(
    gains: &LinkGains,
    noise: &ConferencingNoise,
    samples: usize,
    rng: &mut R,
) -> Result<ConcavityReport> {
    gains.validate()?;
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let s = Scaled::new(gains, noise);
    let mut report = ConcavityReport::default();
    // finite stand-ins keep a and b positive when a link is closed
    let s12 = if noise.link_12_open() {
        noise.sigma2_12
    } else {
        1.0
    };
    let a = (gains.gamma2 + 1.0) / (1.0 + s12);
    let b = 1.0 / (gains.gtilde2.max(1e-12) * (1.0 + s12));
    for _ in 0..samples {
        let u = random_feasible(rng, &s);
        let c = s.coeffs(&u);
        let h = ratio_hessian(a, b, c.p12, c.p22);
        let scale = h
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        report.hessian_samples += 1;
        if h[0][0] >= 0.0 {
            report.minor_violations += 1;
        }
        if det > 1e-8 * scale * scale {
            report.det_violations += 1;
        }

        let v = random_feasible(rng, &s);
        let mid: [f64; 4] = std::array::from_fn(|i| 0.5 * (u[i] + v[i]));
        let gap = 0.5 * (s.value(&u) + s.value(&v)) - s.value(&mid);
        report.midpoint_samples += 1;
        if gap > 1e-12 {
            report.midpoint_violations += 1;
        }
        if gap > report.worst_midpoint_gap {
            report.worst_midpoint_gap = gap;
            report.worst_segment = Some((s.coeffs(&u), s.coeffs(&v)));
        }
    }
    Ok(report)
}
