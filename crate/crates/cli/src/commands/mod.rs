pub mod evolve;
pub mod exponents;
pub mod orthogonality;
pub mod reconstruct;
pub mod resolvent;
pub mod stationary;

use anyhow::Result;
use itfmap_core::StationaryOptions;

use crate::artifacts::Artifacts;
use crate::config::{parse_f64, parse_usize, Config};
use crate::inputs::{parse_epsilon, parse_mode};

/// What a subcommand hands back to `main`.
#[derive(Default)]
pub struct Outcome {
    pub artifacts: Artifacts,
    /// Printed to stdout.
    pub report: Vec<String>,
    /// Checks that did not hold. Artifacts are still written.
    pub failed_checks: Vec<String>,
}

pub const SOLVER_KEYS: [&str; 4] = ["mode", "tol", "max_iter", "epsilon"];

pub fn solver_options(cfg: &Config) -> Result<StationaryOptions> {
    let d = StationaryOptions::default();
    Ok(StationaryOptions {
        mode: cfg.get("mode", d.mode, parse_mode)?,
        tol: cfg.get("tol", d.tol, parse_f64)?,
        max_iter: cfg.get("max_iter", d.max_iter, parse_usize)?,
        epsilon: cfg.get("epsilon", d.epsilon, parse_epsilon)?,
    })
}

/// Union of key lists, for `Config::check_keys`.
pub fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}
