//! `dirac-ent`: coefficient tables, scaling scans and self-tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{cmd_coeff, cmd_scan, CliError, Mode};
use config::{RunConfig, KEYS};

#[derive(Parser)]
#[command(
    name = "dirac-ent",
    version,
    about = "Entanglement entropy asymptotics of free Dirac fermions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write coeff.csv with one row per (alpha, E_F, m, region).
    Coeff {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write scan.csv and fit.json for a list of scales L.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Single)]
        mode: Mode,
        /// Reuse cached per-scale traces.
        #[arg(long)]
        resume: bool,
        /// Exit with 4 when the verdict is FAIL.
        #[arg(long)]
        strict: bool,
    },
    /// Run the built-in invariant checks.
    Selftest,
    /// List the accepted config keys.
    Keys,
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(RunConfig::parse(&text)?)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Coeff { config, out } => {
            let c = load(&config)?;
            let rows = cmd_coeff(&c, &out)?;
            println!("wrote {rows} row(s) to {}", out.join("coeff.csv").display());
            Ok(0)
        }
        Command::Scan {
            config,
            out,
            mode,
            resume,
            strict,
        } => {
            let c = load(&config)?;
            let o = cmd_scan(&c, mode, &out, resume)?;
            let s = &o.summary;
            if o.cache_hits > 0 {
                println!("cache: {} of {} scale(s) reused", o.cache_hits, c.scales.len());
            }
            for f in &s.failed_scales {
                println!("L = {}: failed ({})", f.scale, f.error);
            }
            println!("fit over L = {}..{} ({} points)", s.window[0], s.window[1], s.points);
            println!("  c_log    = {:.8}", s.c_log);
            println!("  c_area   = {:.8}", s.c_area);
            if let Some(c) = s.c_const {
                println!("  c_const  = {c:.8}");
            }
            println!("  residual = {:.3e}", s.residual);
            println!("  W        = {:.8} ({})", s.predicted_w, s.regime);
            println!("verdict: {} (tolerance {})", s.verdict, s.tolerance);
            Ok(if strict && s.verdict != "PASS" { 4 } else { 0 })
        }
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let passed = checks.iter().filter(|c| c.passed).count();
            println!("selftest: {passed}/{} passed", checks.len());
            Ok(if passed == checks.len() { 0 } else { 3 })
        }
        Command::Keys => {
            for (k, doc) in KEYS {
                println!("{k:<22} {doc}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
