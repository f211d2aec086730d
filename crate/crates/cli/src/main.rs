use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use confdiamond::sweep::{advise, run_sweep, SweepBuilder};
use confdiamond::{ConferencingCapacities, Error};
use confdiamond_validation::{run_all, SuiteSizes};

const USAGE: u8 = 1;
const INCONSISTENT: u8 = 2;

/// Rates and bounds for the two-relay diamond channel with conferencing
/// relays.
#[derive(Parser, Debug)]
#[command(name = "confdiamond", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep one parameter and write a CSV table.
    Sweep(SweepArgs),
    /// Recommend a conferencing link and report the rates of one channel.
    Advise(AdviseArgs),
    /// Run the randomized cross-checks of every engine.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Config file with one `key = value` per line; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// gamma2_gtilde1_db, conf_rate, or one of g1 g2 gt1 gt2 c12 c21.
    #[arg(long)]
    axis: Option<String>,
    /// start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Fixed parameter as key=value (gains in dB); repeatable.
    #[arg(long = "fix", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    fix: Vec<String>,
    /// Comma-separated columns, e.g. upper_I,df_I_lp,df_II.
    #[arg(long)]
    quantities: Option<String>,
    /// Output file; stdout when omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AdviseArgs {
    /// SNR of source -> relay 1, dB.
    #[arg(long, allow_hyphen_values = true)]
    g1: f64,
    /// SNR of source -> relay 2, dB.
    #[arg(long, allow_hyphen_values = true)]
    g2: f64,
    /// SNR of relay 1 -> destination, dB.
    #[arg(long, allow_hyphen_values = true)]
    gt1: f64,
    /// SNR of relay 2 -> destination, dB.
    #[arg(long, allow_hyphen_values = true)]
    gt2: f64,
    /// Conferencing rate relay 1 -> relay 2, bits/s/Hz.
    #[arg(long, default_value_t = 0.0)]
    c12: f64,
    /// Conferencing rate relay 2 -> relay 1, bits/s/Hz.
    #[arg(long, default_value_t = 0.0)]
    c21: f64,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Smaller trial counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Inconsistent(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Failure::Usage(e.to_string()),
            Error::Inconsistent(_) => Failure::Inconsistent(e.to_string()),
        }
    }
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut b = SweepBuilder::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        b.apply_config(&text)?;
    }
    if let Some(a) = &args.axis {
        b.set("axis", a)?;
    }
    if let Some(r) = &args.range {
        b.set("range", r)?;
    }
    for pair in &args.fix {
        b.set_pair(pair)?;
    }
    if let Some(q) = &args.quantities {
        b.set("quantities", q)?;
    }
    let spec = b.build()?;
    let table = run_sweep(&spec);
    for row in table.rows.iter().filter(|r| !r.note.is_empty()) {
        eprintln!(
            "warning: at {} = {}: {}",
            spec.axis.as_str(),
            row.axis_value,
            row.note
        );
    }
    let io_err = |e: io::Error| Failure::Usage(format!("cannot write output: {e}"));
    match args.out.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            let f = fs::File::create(p)
                .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?;
            table.write_csv(io::BufWriter::new(f)).map_err(io_err)
        }
        _ => table.write_csv(io::stdout().lock()).map_err(io_err),
    }
}

fn advise_cmd(args: AdviseArgs) -> Result<(), Failure> {
    let conf = ConferencingCapacities::new(args.c12, args.c21)?;
    let report = advise([args.g1, args.g2, args.gt1, args.gt2], &conf)?;
    println!("{report}");
    Ok(())
}

fn selftest(args: SelftestArgs) -> Result<(), Failure> {
    let sizes = if args.quick {
        SuiteSizes::QUICK
    } else {
        SuiteSizes::FULL
    };
    let reports = run_all(sizes, args.seed);
    let mut out = io::stdout().lock();
    for r in &reports {
        let _ = writeln!(out, "{}", r.summary());
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Inconsistent(format!(
            "{failed} of {} checks failed",
            reports.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Advise(a) => advise_cmd(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Inconsistent(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(INCONSISTENT)
        }
    }
}
