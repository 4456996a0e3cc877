use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stiefel_actions::verify::{
    find_suite, list_suites, run_all, run_suite, write_csv, write_json, Dims, SuiteConfig, SuiteReport,
    VerifyError, DEFAULT_SEED,
};

/// Runs named verification suites and writes JSON reports.
///
/// `verify list` prints the catalog, `verify all` runs every suite.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Cli {
    /// Suite name, `all` or `list`.
    suite: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Radius of the l2 window; the window holds 2·radius sites per axis.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Overridden by the VERIFY_SEED environment variable when set.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=FLOAT", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// One CSV row per check.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_tolerance(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw.split_once('=').ok_or("expected NAME=FLOAT")?;
    let value: f64 = value.parse().map_err(|e| format!("bad float `{value}`: {e}"))?;
    if name.is_empty() {
        return Err("empty tolerance name".into());
    }
    Ok((name.to_string(), value))
}

fn seed(cli_seed: u64) -> Result<u64, VerifyError> {
    match std::env::var("VERIFY_SEED") {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| VerifyError::InvalidConfig(format!("VERIFY_SEED `{raw}` is not a u64"))),
        Err(_) => Ok(cli_seed),
    }
}

fn run(cli: Cli) -> Result<i32, VerifyError> {
    if cli.suite == "list" {
        for s in list_suites() {
            println!("{}\t{}", s.name, s.anchor);
        }
        return Ok(0);
    }
    let config = SuiteConfig {
        suite_name: cli.suite.clone(),
        dims: Dims {
            n: cli.n,
            p: cli.p,
            k: cli.k,
            window_radius: cli.window,
        },
        trials: cli.trials,
        seed: seed(cli.seed)?,
        tolerances: cli.tolerances.into_iter().collect(),
        output_path: cli.out.clone(),
    };
    let reports: Vec<SuiteReport> = if cli.suite == "all" {
        run_all(&config)?
    } else {
        find_suite(&cli.suite)?;
        vec![run_suite(&config)?]
    };
    for r in &reports {
        let status = match r.exit_code() {
            0 => "pass",
            1 => "FAIL",
            _ => "ERROR",
        };
        eprintln!("{status:5} {} ({} ms)", r.suite_name, r.runtime_ms);
    }
    match &cli.out {
        Some(path) => write_json(path, &reports)?,
        None => match reports.as_slice() {
            [single] => println!("{}", serde_json::to_string_pretty(single)?),
            many => println!("{}", serde_json::to_string_pretty(many)?),
        },
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &reports)?;
    }
    Ok(reports.iter().map(SuiteReport::exit_code).max().unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
