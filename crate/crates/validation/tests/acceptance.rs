//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line to stderr (uncaptured) before asserting.

use std::io::Write;
use std::time::{Duration, Instant};

use confdiamond::sweep::{run_sweep, Quantity, SweepSpec, SweepTable};
use confdiamond_validation::*;

const SEED: u64 = 2024;

fn report(id: u32, ok: bool, text: &str, elapsed: Duration) {
    let line = format!(
        "{} criterion {id}: {text} [{:.1} s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    // written straight to the handle so the test harness does not capture it
    let _ = std::io::stderr().write_all(line.as_bytes());
}

/// Runs the suites, prints one line for all of them, and fails the test if
/// any suite failed or `limit` was exceeded.
fn check(id: u32, limit: Option<Duration>, suites: impl FnOnce() -> Vec<SuiteReport>) {
    let t0 = Instant::now();
    let reports = suites();
    let elapsed = t0.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = in_time && reports.iter().all(SuiteReport::passed);
    let mut text = match reports.as_slice() {
        // the criterion's verdict already leads the line
        [one] => one.summary()[5..].to_string(),
        many => many
            .iter()
            .map(|r| r.summary())
            .collect::<Vec<_>>()
            .join(" | "),
    };
    if let Some(l) = limit {
        text.push_str(&format!(" | runtime limit {:.0} s", l.as_secs_f64()));
    }
    report(id, ok, &text, elapsed);
    assert!(ok, "criterion {id} failed: {text}");
}

#[test]
fn criterion_1_closed_form_matches_lp() {
    check(1, Some(Duration::from_secs(60)), || {
        vec![closed_form_vs_lp(10_000, SEED)]
    });
}

#[test]
fn criterion_2_one_sided_conferencing_is_optimal() {
    check(2, None, || vec![one_side_optimality(10_000, SEED)]);
}

#[test]
fn criterion_3_large_conferencing_reaches_the_limit() {
    check(3, None, || vec![asymptotic_capacity(1_000, SEED + 2, 1e3)]);
}

#[test]
fn criterion_4_symmetric_strategy_two_meets_strategy_one_bound() {
    check(4, None, || vec![strategy_equivalence(10_000, SEED + 3)]);
}

#[test]
fn criterion_5_minimum_conferencing_sum() {
    check(5, None, || vec![conferencing_threshold(1_000, SEED + 4)]);
}

#[test]
fn criterion_6_af_concavity_and_optimizer() {
    check(6, None, || {
        vec![
            af_hessian(100, 1_000, SEED + 5),
            af_optimizer(1_000, SEED + 6),
            af_gradient_check(1_000, SEED + 7),
        ]
    });
}

#[test]
fn criterion_7_low_snr_af() {
    check(7, None, || vec![af_low_snr_suite(10_000, SEED + 8)]);
}

fn column(t: &SweepTable, q: Quantity) -> Vec<f64> {
    t.column(q).expect("requested column")
}

fn timed(spec: &SweepSpec) -> (SweepTable, Duration) {
    let t0 = Instant::now();
    let t = run_sweep(spec);
    (t, t0.elapsed())
}

#[test]
fn criterion_8_reference_sweeps() {
    let tol = 1e-6;
    let t0 = Instant::now();
    let mut problems = Vec::new();

    let (gain, gain_time) = timed(&SweepSpec::gain_sweep());
    let x = gain.axis_values();
    let (ub1, ub2) = (
        column(&gain, Quantity::UpperI),
        column(&gain, Quantity::UpperII),
    );
    let (df1, df2) = (
        column(&gain, Quantity::DfILp),
        column(&gain, Quantity::DfII),
    );
    if x.len() != 41 {
        problems.push(format!("gain sweep has {} rows", x.len()));
    }
    let meets1: Vec<f64> = (0..x.len())
        .filter(|&i| (ub1[i] - df1[i]).abs() <= tol)
        .map(|i| x[i])
        .collect();
    if meets1 != [10.0] {
        problems.push(format!(
            "strategy-I DF meets its bound at {meets1:?}, expected only 10 dB"
        ));
    }
    let short2: Vec<f64> = (0..x.len())
        .filter(|&i| x[i] <= 10.0 && (ub2[i] - df2[i]).abs() > tol)
        .map(|i| x[i])
        .collect();
    if !short2.is_empty() {
        problems.push(format!("strategy-II DF below its bound at {short2:?} dB"));
    }
    if gain_time > Duration::from_secs(10) {
        problems.push(format!("gain sweep took {gain_time:?}"));
    }

    let (conf, conf_time) = timed(&SweepSpec::conferencing_sweep());
    let c = conf.axis_values();
    let (ub1, ub2) = (
        column(&conf, Quantity::UpperI),
        column(&conf, Quantity::UpperII),
    );
    let (df1, df2) = (
        column(&conf, Quantity::DfILp),
        column(&conf, Quantity::DfII),
    );
    // first rate from which strategy-II DF stays on its bound
    let reach = (0..c.len())
        .rev()
        .take_while(|&i| (ub2[i] - df2[i]).abs() <= tol)
        .last()
        .map(|i| c[i]);
    match reach {
        Some(r) if (10.0..=14.0).contains(&r) => {}
        other => problems.push(format!(
            "strategy-II DF reaches its bound at {other:?}, expected 12 +- 2"
        )),
    }
    let last = c.len() - 1;
    let gap = ub1[last] - df1[last];
    if c[last] != 50.0 || !(0.7..=1.3).contains(&gap) {
        problems.push(format!(
            "strategy-I gap at C = {} is {gap}, expected 1 +- 0.3",
            c[last]
        ));
    }
    if conf_time > Duration::from_secs(10) {
        problems.push(format!("conferencing sweep took {conf_time:?}"));
    }

    let ok = problems.is_empty();
    let text = format!(
        "reference sweeps: strategy-I DF meets its bound at {meets1:?} dB, strategy-II DF on its bound \
         for every gain <= 10 dB: {}, reaches it from C = {reach:?}, strategy-I gap at C = 50 is {gap:.4}; \
         sweep times {gain_time:.2?} and {conf_time:.2?}{}",
        short2.is_empty(),
        if ok { String::new() } else { format!("; problems: {}", problems.join("; ")) }
    );
    report(8, ok, &text, t0.elapsed());
    assert!(ok, "{text}");
}

#[test]
fn criterion_9_sandwich_and_monotonicity() {
    check(9, None, || vec![sandwich_and_monotonicity(10_000, SEED)]);
}
