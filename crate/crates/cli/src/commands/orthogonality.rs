//! Both sides of the integration-by-parts identity for pairs of potentials,
//! at the requested step count and at a quarter of it.

use anyhow::{bail, Result};
use itfmap_core::alessandrini_pair;
use itfmap_core::norms::Rational;

use super::{keys, Outcome};
use crate::config::{parse_f64, parse_usize, Config};
use crate::inputs::{format_f, grid_for, parse_q, potential, FieldSource, GRID_KEYS};

const OWN: [&str; 8] = [
    "potential1",
    "potential2",
    "q",
    "T",
    "steps",
    "samples",
    "f",
    "g",
];

pub fn allowed() -> Vec<&'static str> {
    keys(&[&OWN, &GRID_KEYS])
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outcome> {
    let s1 = FieldSource::parse(cfg, cfg.require("potential1")?, false)?;
    let s2 = FieldSource::parse(cfg, cfg.require("potential2")?, false)?;
    let fsrc = FieldSource::parse(cfg, cfg.raw("f").unwrap_or("bumps"), true)?;
    let gsrc = FieldSource::parse(cfg, cfg.raw("g").unwrap_or("bumps"), true)?;
    let grid = grid_for(cfg, &[&s1, &s2, &fsrc, &gsrc])?;
    let q = cfg.get("q", Rational::new(3, 2), parse_q)?;
    let v1 = potential(s1.sample(&grid, seed, 0)?, q)?;
    let v2 = potential(s2.sample(&grid, seed, 1)?, q)?;
    let t = cfg.get("T", 0.25, parse_f64)?;
    let steps = cfg.get("steps", 1024, parse_usize)?;
    if steps < 4 {
        bail!("steps must be at least 4");
    }
    let random = matches!(fsrc, FieldSource::Bumps) || matches!(gsrc, FieldSource::Bumps);
    let samples = if random {
        cfg.get("samples", 3, parse_usize)?
    } else {
        1
    };

    let mut out = Outcome::default();
    let mut rows = vec!["case,lhs_re,lhs_im,rhs_re,rhs_im,gap".to_string()];
    let (mut worst_fine, mut worst_coarse) = (0.0f64, 0.0f64);
    for j in 0..samples as u64 {
        let f = fsrc.sample(&grid, seed, 2 + 2 * j)?;
        let g = gsrc.sample(&grid, seed, 3 + 2 * j)?;
        for s in [steps / 4, steps] {
            let r = alessandrini_pair(&v1, &v2, &f, &g, t, s)?;
            rows.push(format!(
                "draw{j}_steps{s},{},{},{},{},{}",
                format_f(r.lhs.re),
                format_f(r.lhs.im),
                format_f(r.rhs.re),
                format_f(r.rhs.im),
                format_f(r.gap)
            ));
            if s == steps {
                worst_fine = worst_fine.max(r.gap);
            } else {
                worst_coarse = worst_coarse.max(r.gap);
            }
        }
    }
    out.report.push(format!(
        "largest gap {worst_fine:.3e} at {steps} steps, {worst_coarse:.3e} at {} steps",
        steps / 4
    ));
    out.artifacts.text("orthogonality.csv", &rows, "");
    Ok(out)
}
