//! Recovery of `V1 - V2` on a frequency band, either from the two potentials
//! (stationary states) or from a stored evolution run standing in for `U_T`.

use anyhow::{anyhow, bail, Context, Result};
use itfmap_core::norms::Rational;
use itfmap_core::reconstruct::{xi_band, RecoverOptions, Source};
use itfmap_core::{
    cfld, recover_potential, FreeMap, Grid, Potential, PropagatorMap, ReconstructionReport, Rep,
};

use super::{keys, solver_options, Outcome, SOLVER_KEYS};
use crate::artifacts::split_csv;
use crate::config::{parse_bool, parse_f64, parse_i64, parse_list, parse_usize, Config};
use crate::inputs::{grid_for, parse_q, potential, FieldSource, GRID_KEYS};

const OWN: [&str; 7] = [
    "potential1",
    "potential2",
    "data",
    "q",
    "xi_band",
    "ladder",
    "extrapolate",
];

pub fn allowed() -> Vec<&'static str> {
    keys(&[&OWN, &GRID_KEYS, &SOLVER_KEYS])
}

/// The potential file, final time and step count recorded by `evolve`.
fn read_run(manifest: &std::path::Path) -> Result<(Potential, f64, usize)> {
    let text = std::fs::read_to_string(manifest)
        .with_context(|| format!("reading {}", manifest.display()))?;
    let row = text
        .lines()
        .skip(1)
        .map(split_csv)
        .find(|r| r.first().map(String::as_str) == Some("potential.cfld"))
        .ok_or_else(|| {
            anyhow!(
                "{} has no potential.cfld entry; is it an evolve manifest?",
                manifest.display()
            )
        })?;
    let params = row
        .get(3)
        .ok_or_else(|| anyhow!("manifest row for potential.cfld has no parameters"))?;
    let lookup = |key: &str| {
        params
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .filter(|(k, _)| *k == key)
            .map(|(_, v)| v.to_string())
            .next_back()
            .ok_or_else(|| anyhow!("manifest parameters lack {key}"))
    };
    let t = parse_f64(&lookup("final_time")?)?;
    let steps = parse_usize(&lookup("total_steps")?)?;
    let q = parse_q(&lookup("q").unwrap_or_else(|_| "3/2".to_string()))?;
    let dir = manifest.parent().unwrap_or(std::path::Path::new("."));
    let field = cfld::read_file(dir.join("potential.cfld"))?.in_rep(Rep::Spatial);
    Ok((potential(field, q)?, t, steps))
}

/// Band radius in lattice units; by default `N/4 - 2`, which leaves room for
/// the default ladder inside the grid band.
fn band_radius(cfg: &Config, grid: &Grid) -> Result<f64> {
    let default = (grid.points() as f64 / 4.0 - 2.0).max(2.0);
    cfg.get("xi_band", default, parse_f64)
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outcome> {
    let q = cfg.get("q", Rational::new(3, 2), parse_q)?;
    let ladder = cfg.get("ladder", vec![4, 8, 16], |s| parse_list(s, parse_i64))?;
    let mut opts = RecoverOptions::new(ladder);
    opts.stationary = solver_options(cfg)?;
    opts.extrapolate = cfg.get("extrapolate", false, parse_bool)?;

    let data = cfg.raw("data");
    let direct = cfg.has("potential1") || cfg.has("potential2");
    let (report, grid): (ReconstructionReport, Grid) = match (data, direct) {
        (Some(_), true) => bail!("give either potential1/potential2 or data, not both"),
        (None, false) => bail!("missing input: give potential1 and potential2, or data"),
        (Some(path), false) => {
            if GRID_KEYS.iter().any(|k| cfg.has(k)) {
                bail!("the grid of a data run comes from its potential file; drop n, points and length");
            }
            let (v, t, steps) = read_run(&cfg.path(path))?;
            let grid = v.grid().clone();
            opts.conjugate_fill = v.is_real();
            opts.ground_truth = Some(v.field().clone());
            let map = PropagatorMap {
                potential: v,
                time: t,
                steps,
            };
            let free = FreeMap::new(&grid, t);
            let band = xi_band(&grid, band_radius(cfg, &grid)?);
            let report = recover_potential(
                Source::Data {
                    map: &map,
                    free: &free,
                },
                &band,
                &opts,
            )?;
            (report, grid)
        }
        (None, true) => {
            let s1 = FieldSource::parse(cfg, cfg.require("potential1")?, false)?;
            let s2 = FieldSource::parse(cfg, cfg.require("potential2")?, false)?;
            let grid = grid_for(cfg, &[&s1, &s2])?;
            let v1 = potential(s1.sample(&grid, seed, 0)?, q)?;
            let v2 = potential(s2.sample(&grid, seed, 1)?, q)?;
            opts.conjugate_fill = v1.is_real() && v2.is_real();
            opts.ground_truth = Some(v1.difference(&v2)?);
            let band = xi_band(&grid, band_radius(cfg, &grid)?);
            let report = recover_potential(Source::Direct { v1: &v1, v2: &v2 }, &band, &opts)?;
            (report, grid)
        }
    };

    let n = grid.dim();
    let mut out = Outcome::default();
    let mut rows = vec![ReconstructionReport::csv_header(n)];
    rows.extend(report.csv_rows(n));
    out.artifacts.text("spectrum.csv", &rows, "");
    out.artifacts.field("v_rec.cfld", &report.recovered, "")?;
    let missing = report
        .entries
        .iter()
        .filter(|e| e.final_estimate.is_none())
        .count();
    out.report.push(format!(
        "{} frequencies, {} rungs each{}",
        report.entries.len(),
        opts.ladder.len(),
        if missing > 0 {
            format!(", {missing} without a converged rung")
        } else {
            String::new()
        }
    ));
    if data.is_some() {
        out.report
            .push("data mode: estimates carry a Born error of second order in V".to_string());
    }
    if let Some(e) = report.relative_error {
        out.report
            .push(format!("relative L2 error on the central half box {e:.4e}"));
    }
    Ok(out)
}
