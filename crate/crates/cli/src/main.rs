use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use enlarge_cli::analyze::{self, Mode};
use enlarge_cli::na1cmd::{self, Stop, Which};
use enlarge_cli::output::{engine, sha256_hex, write_atomic, write_json};
use enlarge_cli::selftest::{self, Scale};
use enlarge_core::market::{Market, MarketSpec};
use enlarge_sim::{simulate, Example, SimConfig};
use serde_json::json;

#[derive(Parser)]
#[command(name = "enlarge", version, about = "Filtration enlargement analytics on finite markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report for a progressive or initial enlargement.
    Analyze {
        #[arg(long)]
        market: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// NA1 verdict for a list of assets; exits 1 when NA1 fails.
    Na1 {
        #[arg(long)]
        market: PathBuf,
        #[arg(long, value_enum)]
        filtration: Which,
        /// Comma-separated; besides market assets: S_arb, S_J, S_<label>.
        #[arg(long, value_delimiter = ',')]
        assets: Vec<String>,
        #[arg(long, value_enum)]
        stop: Option<Stop>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo run of a continuous-time example; writes JSON and CSV.
    Simulate {
        #[arg(long)]
        example: Example,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        /// Overridden by ENLARGE_SEED when set.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized invariant suites with a coverage map.
    Selftest {
        #[arg(long, value_enum, default_value_t = Scale::Quick)]
        scale: Scale,
        /// Swap in a broken decomposition; the run must fail.
        #[arg(long, hide = true)]
        tampered: bool,
    },
}

/// An error in the inputs (exit 2), as opposed to a negative verdict (exit 1).
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn load(path: &Path) -> Result<(Market, String)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let market = MarketSpec::from_json(text)
        .and_then(|s| s.build())
        .with_context(|| format!("invalid market spec {}", path.display()))?;
    Ok((market, sha256_hex(&bytes)))
}

fn run(cli: Cli) -> Result<bool, InputError> {
    match cli.command {
        Command::Analyze { market, mode, out } => {
            let (m, hash) = load(&market)?;
            let a = match mode {
                Mode::Progressive => analyze::progressive(&m)?,
                Mode::Initial => analyze::initial(&m)?,
            };
            let failed: Vec<&str> = a.identities.iter().filter(|r| !r.pass()).map(|r| r.name.as_str()).collect();
            let mut report = a.report;
            report["engine"] = engine();
            report["input_sha256"] = json!(hash);
            report["atoms"] = json!(m.atom_ids);
            report["all_identities_pass"] = json!(failed.is_empty());
            write_json(&out, &report)?;
            for name in &failed {
                eprintln!("identity failed: {name}");
            }
            Ok(failed.is_empty())
        }
        Command::Na1 { market, filtration, assets, stop, out } => {
            let (m, hash) = load(&market)?;
            let (mut report, v) = na1cmd::run(&m, filtration, &assets, stop)?;
            report["engine"] = engine();
            report["input_sha256"] = json!(hash);
            write_json(&out, &report)?;
            println!("NA1 {}", if v.holds { "holds" } else { "fails" });
            Ok(v.holds)
        }
        Command::Simulate { example, lambda, horizon, paths, mut seed, out } => {
            if let Ok(s) = std::env::var("ENLARGE_SEED") {
                seed = s.trim().parse().with_context(|| format!("ENLARGE_SEED={s:?} is not an unsigned integer"))?;
            }
            let cfg = SimConfig::new(example, lambda, horizon, paths, seed);
            let report = simulate(&cfg)?;
            let passes = report.passes();
            write_json(&out, &json!({ "engine": engine(), "passes": passes, "report": report }))?;
            write_atomic(&out.with_extension("csv"), report.to_csv().as_bytes())?;
            for s in &report.statistics {
                println!("{:<24} {:>12.6} se {:>10.6} oracle {:>10.6} z {:>7.3}", s.name, s.estimate, s.se, s.oracle, s.z);
            }
            for c in &report.path_checks {
                println!("{:<40} {}/{}", c.name, c.passed, c.total);
            }
            Ok(passes)
        }
        Command::Selftest { scale, tampered } => Ok(selftest::run(scale, tampered)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
