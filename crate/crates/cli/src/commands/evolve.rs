//! Split-step evolution with stored frames, plus an optional grid refinement
//! study for profile-defined (possibly singular) potentials.

use anyhow::{bail, Result};
use itfmap_core::fit::loglog_slope;
use itfmap_core::norms::Rational;
use itfmap_core::propagator::default_steps;
use itfmap_core::{evolve, initial_to_final, Grid};
use rayon::prelude::*;

use super::{keys, Outcome};
use crate::config::{parse_f64, parse_usize, Config};
use crate::inputs::{format_f, grid_for, parse_q, potential, resample, FieldSource, GRID_KEYS};

const OWN: [&str; 7] = ["potential", "initial", "q", "T", "steps", "keep", "refine"];

pub fn allowed() -> Vec<&'static str> {
    keys(&[&OWN, &GRID_KEYS])
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outcome> {
    let vsrc = FieldSource::parse(cfg, cfg.require("potential")?, false)?;
    let fsrc = FieldSource::parse(cfg, cfg.raw("initial").unwrap_or("bumps"), true)?;
    let grid = grid_for(cfg, &[&vsrc, &fsrc])?;
    let q = cfg.get("q", Rational::new(3, 2), parse_q)?;
    let t = parse_f64(cfg.require("T")?)?;
    if !(t > 0.0) {
        bail!("T must be positive");
    }
    let keep = cfg.get("keep", 1, parse_usize)?;
    let refine = cfg.get("refine", 0, parse_usize)?;
    if refine > 0 && matches!(vsrc, FieldSource::File(_)) {
        bail!(
            "a refinement study resamples the potential, so it needs a profile, not a field file"
        );
    }
    if refine > 4 {
        bail!("refine is limited to 4 doublings");
    }

    let v = potential(vsrc.sample(&grid, seed, 0)?, q)?;
    let f = fsrc.sample(&grid, seed, 1)?;
    let steps = cfg.get("steps", default_steps(&v, t), parse_usize)?;
    let traj = evolve(&v, &f, t, steps, keep)?;

    let mut out = Outcome::default();
    let mut rows = vec!["frame,time,l2_norm".to_string()];
    for (j, (time, frame)) in traj.times().iter().zip(traj.frames()).enumerate() {
        out.artifacts.field(
            &format!("frame_{j:05}.cfld"),
            frame,
            &format!("time={}", format_f(*time)),
        )?;
        rows.push(format!("{j},{},{}", format_f(*time), format_f(frame.l2())));
    }
    // The potential travels with the frames so the run can stand in for U_T.
    out.artifacts.field(
        "potential.cfld",
        v.field(),
        &format!("final_time={};total_steps={steps}", format_f(t)),
    )?;
    out.artifacts.text("trajectory.csv", &rows, "");
    let drift = (traj.last().l2() - f.l2()).abs() / f.l2().max(f64::MIN_POSITIVE);
    out.report.push(format!(
        "{} frames to T = {t} in {steps} steps; relative mass drift {drift:.2e}",
        traj.frames().len()
    ));

    if refine > 0 {
        let levels: Vec<Grid> = (0..=refine)
            .map(|j| Grid::new(grid.dim(), grid.points() << j, grid.length()))
            .collect::<Result<_, _>>()?;
        let finals: Vec<_> = levels
            .par_iter()
            .map(|g| -> Result<_> {
                let vg = potential(vsrc.sample(g, seed, 0)?, q)?;
                let fg = resample(&f, g)?;
                Ok(initial_to_final(&vg, &fg, t, steps)?)
            })
            .collect::<Result<_>>()?;
        let finest = finals.last().expect("nonempty");
        let mut rows = vec!["points,steps,relative_l2_to_finest".to_string()];
        let (mut hs, mut errs) = (Vec::new(), Vec::new());
        for (g, u) in levels.iter().zip(&finals).take(refine) {
            let reference = resample(finest, g)?;
            let err = u.sub(&reference)?.l2() / reference.l2();
            rows.push(format!("{},{steps},{}", g.points(), format_f(err)));
            hs.push(g.spacing());
            errs.push(err);
        }
        let fit = loglog_slope(&hs, &errs);
        if fit.defined {
            out.report.push(format!(
                "grid refinement: difference to finest grid scales like h^{:.3}",
                fit.slope
            ));
        } else {
            out.report
                .push(format!("grid refinement: differences {errs:?}"));
        }
        out.artifacts.text("refinement.csv", &rows, "");
    }
    Ok(out)
}
