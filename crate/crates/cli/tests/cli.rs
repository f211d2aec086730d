use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_confdiamond"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gain_sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gain.csv");
    let cfg = config("gain_sweep.conf");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "gamma2_gtilde1_db,upper_I,upper_II,df_I_lp,df_II,note"
    );
    assert_eq!(lines.len(), 42);
    assert!(!csv.contains('\r'));
    // at 10 dB the channel is symmetric and all four columns coincide
    assert_eq!(lines[21], "10,3.45943162,3.45943162,3.45943162,3.45943162,");
}

#[test]
fn flags_override_config() {
    let cfg = config("conferencing_sweep.conf");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--range",
        "0:2:1",
        "--fix",
        "g2=10",
        "--fix",
        "gt1=10",
        "--quantities",
        "df_II,selected_link",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "conf_rate,df_II,selected_link,note\n0,3.45943162,none,\n1,3.45943162,none,\n2,3.45943162,none,\n"
    );
}

#[test]
fn sweep_output_is_deterministic() {
    let cfg = config("conferencing_sweep.conf");
    let args = [
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--quantities",
        "upper_I,df_I_lp,df_I_closed,df_II,af,min_conf_sum",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn negative_range_and_single_axis() {
    let o = run(&[
        "sweep",
        "--axis",
        "g1",
        "--range",
        "-10:-8:1",
        "--fix",
        "g2=0",
        "--fix",
        "gt1=0",
        "--fix",
        "gt2=0",
        "--fix",
        "c12=1",
        "--fix",
        "c21=0",
        "--quantities",
        "upper_I",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("g1,upper_I,note\n-10,"));
    assert_eq!(s.lines().count(), 4);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec![
            "sweep",
            "--axis",
            "conf_rate",
            "--range",
            "0:1:1",
            "--quantities",
            "af",
        ],
        vec!["sweep", "--axis", "nope", "--range", "0:1:1"],
        vec!["sweep", "--config", "/nonexistent/cfg"],
        vec!["advise", "--g1", "1"],
        vec![
            "advise", "--g1", "0", "--g2", "0", "--gt1", "0", "--gt2", "0", "--c12", "-1",
        ],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn advise_skewed_channel() {
    // C values (4, 1, 1, 4): 2^4 - 1 = 15, 2^1 - 1 = 1
    let db = |x: f64| format!("{}", 10.0 * x.log10());
    let (hi, lo) = (db(15.0), db(1.0));
    let o = run(&[
        "advise", "--g1", &hi, "--g2", &lo, "--gt1", &lo, "--gt2", &hi, "--c12", "4",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("conferencing link: relay1_to_relay2"), "{s}");
    assert!(s.contains("DF rate, strategy II:          4\n"), "{s}");
    assert!(
        s.trim_end().ends_with("min conferencing sum (II):     4"),
        "{s}"
    );
}

#[test]
fn advise_symmetric_channel_needs_no_conferencing() {
    let o = run(&[
        "advise", "--g1", "10", "--g2", "10", "--gt1", "10", "--gt2", "10",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(
        s.contains("conferencing link: none (no relay conferencing)"),
        "{s}"
    );
    // without conferencing both strategies give the same DF rate
    let rate = |label: &str| {
        s.lines()
            .find(|l| l.starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .unwrap()
            .to_string()
    };
    assert_eq!(rate("DF rate, strategy I:"), rate("DF rate, strategy II:"));
}

#[test]
fn quick_selftest_passes_or_reports() {
    let o = run(&["selftest", "--quick"]);
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 10, "{s}");
    let failed = s.lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 2 }));
}
