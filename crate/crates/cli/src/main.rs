//! `unruh`: detector response, pole maps and KMS / preservation verdicts.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verdict table disagrees with the
//! reference, 3 numerical failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};

use commands::Failure;
use config::{parse_grid, MethodChoice, RunConfig, Runtime, SharedFlags};

#[derive(Debug, Parser)]
#[command(name = "unruh", version, about = "Accelerated-detector response to deformed Wightman functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Response function over an Ω grid (adiabatic residue formula and/or finite-σ quadrature).
    Respond {
        #[command(flatten)]
        shared: SharedFlags,
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
    },
    /// Poles of the pulled-back two-point function in the strip, optionally tracked along ℓ.
    Poles {
        #[command(flatten)]
        shared: SharedFlags,
        /// w·a values: comma list or start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Track poles from ℓ = 0 along the ℓ-ladder.
        #[arg(long)]
        track: bool,
        /// Half-width of the scan window in Re z, units of 1/a.
        #[arg(long)]
        re_half: Option<f64>,
    },
    /// The four KMS sub-conditions.
    Kms {
        #[command(flatten)]
        shared: SharedFlags,
        /// Points per axis of the symmetry-check grid.
        #[arg(long)]
        kms_grid: Option<usize>,
    },
    /// KMS checks, preservation conditions A/B/C and the detailed-balance gap.
    Preserve {
        #[command(flatten)]
        shared: SharedFlags,
        #[arg(long)]
        kms_grid: Option<usize>,
    },
    /// The full verdict table for the catalog, compared cell by cell with the reference.
    Table1 {
        #[command(flatten)]
        shared: SharedFlags,
        /// Restrict to these rows (ids or names, comma separated).
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        kms_grid: Option<usize>,
    },
}

type Runner = fn(&RunConfig, &Runtime) -> Result<String, Failure>;

fn prepare(command: &Command) -> Result<(RunConfig, Runtime, Runner), Failure> {
    let v = Failure::Validation;
    let (shared, run): (&SharedFlags, Runner) = match command {
        Command::Respond { shared, .. } => (shared, commands::respond),
        Command::Poles { shared, .. } => (shared, commands::poles),
        Command::Kms { shared, .. } => (shared, commands::kms),
        Command::Preserve { shared, .. } => (shared, commands::preserve),
        Command::Table1 { shared, .. } => (shared, commands::table1),
    };
    let (mut cfg, rt) = shared.resolve().map_err(v)?;
    match command {
        Command::Respond { method, .. } => {
            if let Some(m) = method {
                cfg.method = *m;
            }
        }
        Command::Poles { w, track, re_half, .. } => {
            if let Some(s) = w {
                cfg.w = parse_grid(s).map_err(v)?;
            }
            cfg.track |= *track;
            if let Some(r) = re_half {
                cfg.re_half = *r;
            }
        }
        Command::Kms { kms_grid, .. } | Command::Preserve { kms_grid, .. } => {
            if let Some(n) = kms_grid {
                cfg.kms_grid = *n;
            }
        }
        Command::Table1 { only, kms_grid, .. } => {
            if let Some(s) = only {
                cfg.only = s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
            }
            if let Some(n) = kms_grid {
                cfg.kms_grid = *n;
            }
        }
    }
    cfg.validate().map_err(v)?;
    if rt.workers == Some(0) {
        return Err(v(anyhow!("--workers must be at least 1")));
    }
    Ok((cfg, rt, run))
}

fn run(cli: Cli) -> Result<String, Failure> {
    let (cfg, rt, runner) = prepare(&cli.command)?;
    if let Some(n) = rt.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(anyhow!("cannot start {n} workers: {e}")))?;
    }
    runner(&cfg, &rt)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
