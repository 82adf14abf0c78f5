//! `itfmap`: experiments on the initial-to-final-state map.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod commands;
mod config;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Outcome;
use config::Config;

#[derive(Parser, Debug)]
#[command(
    name = "itfmap",
    version,
    about = "Spectral experiments for the initial-to-final-state map"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts and `manifest.csv`. Without it results are
    /// only printed.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the exponent table for a dimension and potential exponent.
    Exponents {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<String>,
    },
    /// Resolvent estimate ratios over a lambda ladder, with slope checks.
    VerifyResolvent,
    /// Stationary scattering states and their diagnostics.
    Stationary,
    /// Split-step evolution with stored frames.
    Evolve {
        #[arg(long = "T")]
        t: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        keep: Option<usize>,
        /// Number of grid doublings in a refinement study.
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Both sides of the integration-by-parts identity.
    Orthogonality,
    /// Recover V1 - V2 from potentials or from an evolve run.
    Reconstruct {
        /// Radius of the frequency band in lattice units.
        #[arg(long)]
        xi_band: Option<String>,
        /// Ladder m1,m2,...
        #[arg(long)]
        ladder: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        extrapolate: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exponents { .. } => "exponents",
            Command::VerifyResolvent => "verify-resolvent",
            Command::Stationary => "stationary",
            Command::Evolve { .. } => "evolve",
            Command::Orthogonality => "orthogonality",
            Command::Reconstruct { .. } => "reconstruct",
        }
    }

    /// Copy flags into the config, where they override the file.
    fn apply_flags(&self, cfg: &mut Config) {
        let mut set = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                cfg.set(key, v);
            }
        };
        match self {
            Command::Exponents { n, q } => {
                set("n", n.map(|v| v.to_string()));
                set("q", q.clone());
            }
            Command::Evolve {
                t,
                steps,
                keep,
                refine,
            } => {
                set("T", t.clone());
                set("steps", steps.map(|v| v.to_string()));
                set("keep", keep.map(|v| v.to_string()));
                set("refine", refine.map(|v| v.to_string()));
            }
            Command::Reconstruct {
                xi_band,
                ladder,
                mode,
                extrapolate,
            } => {
                set("xi_band", xi_band.clone());
                set("ladder", ladder.clone());
                set("mode", mode.clone());
                if *extrapolate {
                    set("extrapolate", Some("true".into()));
                }
            }
            _ => {}
        }
    }

    fn allowed_keys(&self) -> Vec<&'static str> {
        match self {
            Command::Exponents { .. } => commands::exponents::KEYS.to_vec(),
            Command::VerifyResolvent => commands::resolvent::KEYS.to_vec(),
            Command::Stationary => commands::stationary::allowed(),
            Command::Evolve { .. } => commands::evolve::allowed(),
            Command::Orthogonality => commands::orthogonality::allowed(),
            Command::Reconstruct { .. } => commands::reconstruct::allowed(),
        }
    }

    fn run(&self, cfg: &Config, seed: u64) -> Result<Outcome> {
        match self {
            Command::Exponents { .. } => commands::exponents::run(cfg),
            Command::VerifyResolvent => commands::resolvent::run(cfg, seed),
            Command::Stationary => commands::stationary::run(cfg, seed),
            Command::Evolve { .. } => commands::evolve::run(cfg, seed),
            Command::Orthogonality => commands::orthogonality::run(cfg, seed),
            Command::Reconstruct { .. } => commands::reconstruct::run(cfg, seed),
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    cli.command.apply_flags(&mut cfg);
    cfg.check_keys(&cli.command.allowed_keys())?;

    let outcome = cli.command.run(&cfg, cli.seed)?;
    for line in &outcome.report {
        println!("{line}");
    }
    match &cli.out {
        Some(dir) => {
            let params = format!(
                "command={};seed={};{}",
                cli.command.name(),
                cli.seed,
                cfg.canonical()
            );
            outcome.artifacts.commit(dir, &params)?;
            log::info!("artifacts written to {}", dir.display());
        }
        None if !outcome.artifacts.is_empty() => {
            log::info!("no --out given; artifacts not written")
        }
        None => {}
    }
    Ok(outcome.failed_checks)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            for f in failed {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
