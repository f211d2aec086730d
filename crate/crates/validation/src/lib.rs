//! Randomized cross-checks between the engines and their brute-force
//! oracles. Each suite draws its instances from a seeded generator, runs in
//! parallel, and returns a [`SuiteReport`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use confdiamond::af::{
    af_gradient, af_grid_oracle, af_low_snr, check_concavity, conferencing_noise, low_snr_lp,
    maximize_af, AfCoefficients, LowSnrCase,
};
use confdiamond::channel::{ConferencingCapacities, LinkGains};
use confdiamond::strategy1::{
    asymptotic_df_limit, df_rate_closed_form_checked, df_rate_lp, df_rate_lp_restricted,
    printed_closed_form_rate, upper_bound_i, ConferencingLink, DISCREPANCY_TOL,
};
use confdiamond::strategy2::{
    df_rate_ii, min_conferencing_for_capacity, upper_bound_ii, symmetric_df_meets_bound_i, ACHIEVES_TOL,
};
use confdiamond::Result;

/// Outcome of one randomized suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest error seen, in the suite's own metric.
    pub worst: f64,
    pub tolerance: f64,
    /// Extra counts worth reporting (flagged or skipped instances, ...).
    pub notes: Vec<String>,
    /// First violating instance, if any.
    pub example: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {}: {}/{} violations, worst {:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.violations,
            self.trials,
            self.worst,
            self.tolerance
        );
        for n in &self.notes {
            s.push_str("; ");
            s.push_str(n);
        }
        if let Some(e) = &self.example {
            s.push_str("; e.g. ");
            s.push_str(e);
        }
        s
    }
}

/// Per-trial verdict: the error metric and whether it violates.
struct Trial {
    err: f64,
    bad: bool,
    flags: [usize; 2],
    desc: String,
}

impl Trial {
    fn new(err: f64, tol: f64) -> Self {
        Self {
            err,
            bad: err.is_nan() || err > tol,
            flags: [0; 2],
            desc: String::new(),
        }
    }

    fn describe(mut self, f: impl FnOnce() -> String) -> Self {
        if self.bad {
            self.desc = f();
        }
        self
    }
}

fn collect(name: &str, tol: f64, trials: Vec<Result<Trial>>) -> (SuiteReport, [usize; 2]) {
    let mut report = SuiteReport {
        name: name.to_string(),
        trials: trials.len(),
        violations: 0,
        worst: 0.0,
        tolerance: tol,
        notes: Vec::new(),
        example: None,
    };
    let mut flags = [0; 2];
    for t in trials {
        match t {
            Ok(t) => {
                report.worst = report.worst.max(t.err);
                flags[0] += t.flags[0];
                flags[1] += t.flags[1];
                if t.bad {
                    report.violations += 1;
                    report.example.get_or_insert(t.desc);
                }
            }
            Err(e) => {
                report.violations += 1;
                report.example.get_or_insert(e.to_string());
            }
        }
    }
    (report, flags)
}

fn run<F>(seed: u64, n: usize, f: F) -> Vec<Result<Trial>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Trial> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(&mut instance_rng(seed, i)))
        .collect()
}

/// Independent generator for trial `i` of a suite.
pub fn instance_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Four link SNRs, each log-uniform over `[-10, 30]` dB.
pub fn random_gains<R: Rng>(rng: &mut R) -> LinkGains {
    let mut db = || rng.gen_range(-10.0..=30.0);
    LinkGains::from_db(db(), db(), db(), db()).expect("finite dB values")
}

/// Gains whose four link capacities are uniform over `[0, max_rate]`.
pub fn random_gains_by_rate<R: Rng>(rng: &mut R, max_rate: f64) -> LinkGains {
    let mut r = || rng.gen_range(0.0..=max_rate);
    LinkGains::from_capacities(r(), r(), r(), r()).expect("nonnegative rates")
}

/// Conferencing rates, each uniform over `[0, 10]`.
pub fn random_conf<R: Rng>(rng: &mut R) -> ConferencingCapacities {
    ConferencingCapacities::new(rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0))
        .expect("nonnegative rates")
}

fn fmt_instance(g: &LinkGains, c: &ConferencingCapacities) -> String {
    format!(
        "gains ({:.6e}, {:.6e}, {:.6e}, {:.6e}), conf ({:.6}, {:.6})",
        g.gamma1, g.gamma2, g.gtilde1, g.gtilde2, c.c12, c.c21
    )
}

fn pct(k: usize, n: usize) -> f64 {
    100.0 * k as f64 / n.max(1) as f64
}

/// Closed-form strategy-I DF rate against the LP. The re-derived
/// breakpoints must agree everywhere; the as-printed transcription is
/// measured and its disagreement rate reported.
pub fn closed_form_vs_lp(n: usize, seed: u64) -> SuiteReport {
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let c = random_conf(rng);
        let chk = df_rate_closed_form_checked(&g, &c)?;
        let err = (chk.closed.rate - chk.lp.rate).abs();
        let printed = printed_closed_form_rate(&g, &c)?;
        let mut t = Trial::new(err, DISCREPANCY_TOL).describe(|| fmt_instance(&g, &c));
        t.flags[0] = usize::from((printed - chk.lp.rate).abs() > DISCREPANCY_TOL);
        Ok(t)
    });
    let (mut r, flags) = collect("closed form vs LP (strategy I)", DISCREPANCY_TOL, trials);
    r.notes.push(format!(
        "as-printed breakpoint transcription disagrees on {} of {} ({:.1}%)",
        flags[0],
        n,
        pct(flags[0], n)
    ));
    r
}

/// Restricting to one conferencing link loses nothing.
pub fn one_side_optimality(n: usize, seed: u64) -> SuiteReport {
    let tol = 1e-9;
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let c = random_conf(rng);
        let full = df_rate_lp(&g, &c)?.rate;
        let a = df_rate_lp_restricted(&g, &c, ConferencingLink::Relay1ToRelay2)?.rate;
        let b = df_rate_lp_restricted(&g, &c, ConferencingLink::Relay2ToRelay1)?.rate;
        let err = (a.max(b) - full).abs();
        Ok(Trial::new(err, tol).describe(|| fmt_instance(&g, &c)))
    });
    collect("one-sided conferencing is optimal", tol, trials).0
}

/// DF rate with very large conferencing rates against the two-term limit.
pub fn asymptotic_capacity(n: usize, seed: u64, k: f64) -> SuiteReport {
    let tol = 1e-6;
    let trials = run(seed, n, |rng| {
        let g = random_gains_by_rate(rng, 10.0);
        let c = ConferencingCapacities::symmetric(k)?;
        let df = df_rate_lp(&g, &c)?.rate;
        let lim = asymptotic_df_limit(&g)?.value;
        let err = (df - lim).abs();
        Ok(Trial::new(err, tol)
            .describe(|| format!("{}: DF {df:.9}, limit {lim:.9}", fmt_instance(&g, &c))))
    });
    collect(
        &format!("DF at C12 = C21 = {k} meets the two-term limit"),
        tol,
        trials,
    )
    .0
}

/// Strategy-II DF with symmetric conferencing meets the strategy-I bound.
pub fn strategy_equivalence(n: usize, seed: u64) -> SuiteReport {
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let c: f64 = rng.gen_range(0.0..=10.0);
        let conf = ConferencingCapacities::symmetric(c)?;
        let err = (df_rate_ii(&g, &conf)?.rate - upper_bound_i(&g, &conf)?.value).abs();
        let ok = symmetric_df_meets_bound_i(&g, c)?;
        let mut t = Trial::new(err, ACHIEVES_TOL).describe(|| fmt_instance(&g, &conf));
        t.bad |= !ok;
        Ok(t)
    });
    collect(
        "strategy-II DF equals strategy-I bound (symmetric conferencing)",
        ACHIEVES_TOL,
        trials,
    )
    .0
}

/// Minimum conferencing sum: enough on each link reaches the strategy-II
/// bound, 90% of it split evenly does not. Also counts instances where the
/// exact sum split evenly falls short.
pub fn conferencing_threshold(n: usize, seed: u64) -> SuiteReport {
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let t = min_conferencing_for_capacity(&g)?;
        let m = t.min_conf_sum;
        let full = ConferencingCapacities::symmetric(m)?;
        let gap_full = upper_bound_ii(&g, &full)?.value - df_rate_ii(&g, &full)?.rate;
        let mut bad = gap_full > ACHIEVES_TOL;
        let mut gap_short = f64::NAN;
        if m > 1e-3 {
            let short = ConferencingCapacities::symmetric(0.45 * m)?;
            gap_short = upper_bound_ii(&g, &short)?.value - df_rate_ii(&g, &short)?.rate;
            bad |= gap_short.is_nan() || gap_short <= 1e-9;
        }
        let half = ConferencingCapacities::symmetric(0.5 * m)?;
        let gap_half = upper_bound_ii(&g, &half)?.value - df_rate_ii(&g, &half)?.rate;
        let mut trial = Trial::new(gap_full.max(0.0), ACHIEVES_TOL);
        trial.bad = bad;
        trial.flags[0] = usize::from(gap_half > ACHIEVES_TOL);
        trial.flags[1] = usize::from(t.table_mismatch(1e-9));
        Ok(trial.describe(|| {
            format!(
                "{}: min sum {m:.9}, gap at full {gap_full:.3e}, gap at 90% {gap_short:.3e}",
                fmt_instance(&g, &full)
            )
        }))
    });
    let (mut r, flags) = collect("minimum conferencing sum is tight", ACHIEVES_TOL, trials);
    r.notes.push(format!(
        "exact sum split evenly falls short on {} of {} ({:.1}%)",
        flags[0],
        n,
        pct(flags[0], n)
    ));
    r.notes.push(format!(
        "table entry differs from computed threshold on {} of {} ({:.1}%)",
        flags[1],
        n,
        pct(flags[1], n)
    ));
    r
}

/// Sign conditions on the Hessian of the normalized cross term, plus a
/// midpoint-concavity probe of the full AF objective.
pub fn af_hessian(instances: usize, points: usize, seed: u64) -> SuiteReport {
    let reports: Vec<Result<_>> = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i);
            let g = random_gains(&mut rng);
            let c = random_conf(&mut rng);
            let noise = conferencing_noise(&g, &c)?;
            Ok((g, c, check_concavity(&g, &noise, points, &mut rng)?))
        })
        .collect();
    let mut r = SuiteReport {
        name: "AF cross-term Hessian: leading minor < 0, det <= 0".into(),
        trials: instances * points,
        violations: 0,
        worst: 0.0,
        tolerance: 1e-8,
        notes: Vec::new(),
        example: None,
    };
    let (mut mid_bad, mut mid_n, mut mid_worst) = (0, 0, 0.0f64);
    for rep in reports {
        match rep {
            Ok((g, c, rep)) => {
                let v = rep.minor_violations + rep.det_violations;
                r.violations += v;
                if v > 0 {
                    r.example.get_or_insert_with(|| fmt_instance(&g, &c));
                }
                mid_bad += rep.midpoint_violations;
                mid_n += rep.midpoint_samples;
                mid_worst = mid_worst.max(rep.worst_midpoint_gap);
            }
            Err(e) => {
                r.violations += 1;
                r.example.get_or_insert(e.to_string());
            }
        }
    }
    r.notes.push(format!(
        "midpoint concavity of R1+R2 fails on {mid_bad} of {mid_n} segments (worst chord excess {mid_worst:.3e})"
    ));
    r
}

/// Points per axis of the oracle's coarse grid. The best cross fraction of
/// one relay can flip end to end within 0.01 of the other's, so 101 is too
/// coarse.
const ORACLE_POINTS: usize = 201;

/// Projected-gradient AF optimum against the refined grid oracle.
pub fn af_optimizer(n: usize, seed: u64) -> SuiteReport {
    let tol = 1e-4;
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let c = random_conf(rng);
        let noise = conferencing_noise(&g, &c)?;
        let best = maximize_af(&g, &c)?;
        let grid = af_grid_oracle(&g, &noise, ORACLE_POINTS);
        let err = (best.rate - grid.rate).abs();
        let mut t = Trial::new(err, tol).describe(|| {
            format!(
                "{}: ascent {:.9}, grid {:.9}",
                fmt_instance(&g, &c),
                best.rate,
                grid.rate
            )
        });
        t.flags[0] = usize::from(!best.converged);
        Ok(t)
    });
    let (mut r, flags) = collect("AF ascent matches grid oracle", tol, trials);
    r.notes.push(format!("{} hit the iteration cap", flags[0]));
    r
}

/// Analytic AF gradient against central differences at interior points.
pub fn af_gradient_check(n: usize, seed: u64) -> SuiteReport {
    let tol = 1e-5;
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        // keep both links open so every component is exercised
        let c = ConferencingCapacities::new(rng.gen_range(0.1..=10.0), rng.gen_range(0.1..=10.0))?;
        let noise = conferencing_noise(&g, &c)?;
        let scale = [
            1.0 / (g.gamma1 + 1.0),
            1.0 / (g.gamma1 + 1.0 + noise.sigma2_12),
            1.0 / (g.gamma2 + 1.0 + noise.sigma2_21),
            1.0 / (g.gamma2 + 1.0),
        ];
        let mut p = [0.0; 4];
        for (pi, s) in p.iter_mut().zip(scale) {
            *pi = rng.gen_range(0.05..=0.45) * s;
        }
        let at = |p: [f64; 4]| AfCoefficients {
            p11: p[0],
            p12: p[1],
            p21: p[2],
            p22: p[3],
        };
        let f = |p: [f64; 4]| -> Result<f64> {
            let (a, b) = confdiamond::af::af_objective(&g, &noise, &at(p))?;
            Ok(a + b)
        };
        let ga = af_gradient(&g, &noise, &at(p));
        let mut err = 0.0f64;
        for i in 0..4 {
            let h = 1e-6 * p[i];
            let (mut up, mut dn) = (p, p);
            up[i] += h;
            dn[i] -= h;
            let fd = (f(up)? - f(dn)?) / (2.0 * h);
            err = err.max((ga[i] - fd).abs() / ga[i].abs().max(1e-300));
        }
        Ok(Trial::new(err, tol).describe(|| fmt_instance(&g, &c)))
    });
    collect("AF analytic gradient vs central differences", tol, trials).0
}

/// Low-SNR case split: never the impossible case, matches the LP, and the
/// exact optimizer switches on the same coefficients.
pub fn af_low_snr_suite(n: usize, seed: u64) -> SuiteReport {
    let tol = 1e-9;
    let trials = run(seed, n, |rng| {
        let mut g = random_gains(rng);
        g.gtilde1 = 1e-4;
        g.gtilde2 = 1e-4;
        let c = random_conf(rng);
        let noise = conferencing_noise(&g, &c)?;
        let low = af_low_snr(&g, &noise)?;
        let (lp_value, _) = low_snr_lp(&g, &noise)?;
        let err = (low.linear_value - lp_value).abs();
        let mut t = Trial::new(err, tol);

        // support comparison, skipped when either relay is close to a tie
        let near_tie = |x: f64, y: f64| (x - y).abs() <= 1e-3 * x.abs().max(y.abs());
        let (g1, g2) = (g.gamma1, g.gamma2);
        let r21 = if noise.link_21_open() {
            g2 / (g2 + 1.0 + noise.sigma2_21)
        } else {
            0.0
        };
        let r12 = if noise.link_12_open() {
            g1 / (g1 + 1.0 + noise.sigma2_12)
        } else {
            0.0
        };
        if near_tie(g1 / (g1 + 1.0), r21) || near_tie(g2 / (g2 + 1.0), r12) {
            t.flags[0] = 1;
        } else {
            let best = maximize_af(&g, &c)?;
            let on = |p: f64, s: f64| p > 1e-6 * s;
            let support = (
                on(best.coeffs.p11, 1.0 / (g1 + 1.0)),
                on(best.coeffs.p12, 1.0 / (g1 + 1.0)),
                on(best.coeffs.p21, 1.0 / (g2 + 1.0)),
                on(best.coeffs.p22, 1.0 / (g2 + 1.0)),
            );
            let expect = match low.case {
                LowSnrCase::Direct => (true, false, false, true),
                LowSnrCase::BothForwardRelay2 => (false, false, true, true),
                LowSnrCase::BothForwardRelay1 => (true, true, false, false),
            };
            if support != expect {
                t.bad = true;
                t.flags[1] = 1;
            }
        }
        Ok(t.describe(|| format!("{} case {:?}", fmt_instance(&g, &c), low.case)))
    });
    let (mut r, flags) = collect("AF low-SNR case split vs LP and optimizer", tol, trials);
    r.notes.push(format!(
        "{} near-tie draws skipped for the support check",
        flags[0]
    ));
    r.notes.push(format!("{} support mismatches", flags[1]));
    r
}

/// DF rates below their bounds, strategy II above strategy I, and DF
/// nondecreasing when any capacity or gain grows.
pub fn sandwich_and_monotonicity(n: usize, seed: u64) -> SuiteReport {
    let tol = 1e-9;
    let trials = run(seed, n, |rng| {
        let g = random_gains(rng);
        let c = random_conf(rng);
        let df1 = df_rate_lp(&g, &c)?.rate;
        let df2 = df_rate_ii(&g, &c)?.rate;
        let ub1 = upper_bound_i(&g, &c)?.value;
        let ub2 = upper_bound_ii(&g, &c)?.value;
        let mut err = (df1 - ub1).max(df2 - ub2).max(df1 - df2).max(ub1 - ub2);
        let mut what = String::from("sandwich");
        let bump = 1.0 + rng.gen_range(0.01..=1.0);
        let mut raised = Vec::new();
        for k in 0..4 {
            let mut h = g;
            match k {
                0 => h.gamma1 *= bump,
                1 => h.gamma2 *= bump,
                2 => h.gtilde1 *= bump,
                _ => h.gtilde2 *= bump,
            }
            raised.push((h, c, format!("gain {k}")));
        }
        let dc = rng.gen_range(0.01..=2.0);
        raised.push((
            g,
            ConferencingCapacities::new(c.c12 + dc, c.c21)?,
            "c12".into(),
        ));
        raised.push((
            g,
            ConferencingCapacities::new(c.c12, c.c21 + dc)?,
            "c21".into(),
        ));
        for (h, cc, label) in raised {
            let drop1 = df1 - df_rate_lp(&h, &cc)?.rate;
            let drop2 = df2 - df_rate_ii(&h, &cc)?.rate;
            if drop1.max(drop2) > err {
                err = drop1.max(drop2);
                what = format!("raising {label}");
            }
        }
        Ok(Trial::new(err.max(0.0), tol).describe(|| format!("{} ({what})", fmt_instance(&g, &c))))
    });
    collect(
        "DF below bounds and monotone in every capacity and gain",
        tol,
        trials,
    )
    .0
}

/// Sizes of the randomized suites.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub df: usize,
    pub asymptotic: usize,
    pub threshold: usize,
    pub af_instances: usize,
    pub af_hessian_instances: usize,
    pub af_hessian_points: usize,
    pub low_snr: usize,
}

impl SuiteSizes {
    pub const FULL: Self = Self {
        df: 10_000,
        asymptotic: 1_000,
        threshold: 1_000,
        af_instances: 1_000,
        af_hessian_instances: 100,
        af_hessian_points: 1_000,
        low_snr: 10_000,
    };

    pub const QUICK: Self = Self {
        df: 500,
        asymptotic: 100,
        threshold: 100,
        af_instances: 100,
        af_hessian_instances: 10,
        af_hessian_points: 100,
        low_snr: 500,
    };
}

/// Every suite, in a fixed order. The strategy-I oracle, one-sided and
/// sandwich suites share `seed` and therefore draw the same channels.
pub fn run_all(sizes: SuiteSizes, seed: u64) -> Vec<SuiteReport> {
    vec![
        closed_form_vs_lp(sizes.df, seed),
        one_side_optimality(sizes.df, seed),
        asymptotic_capacity(sizes.asymptotic, seed + 2, 1e3),
        strategy_equivalence(sizes.df, seed + 3),
        conferencing_threshold(sizes.threshold, seed + 4),
        af_hessian(
            sizes.af_hessian_instances,
            sizes.af_hessian_points,
            seed + 5,
        ),
        af_optimizer(sizes.af_instances, seed + 6),
        af_gradient_check(sizes.af_instances, seed + 7),
        af_low_snr_suite(sizes.low_snr, seed + 8),
        sandwich_and_monotonicity(sizes.df, seed),
    ]
}
