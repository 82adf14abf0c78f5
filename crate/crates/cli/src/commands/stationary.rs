//! Stationary states `w0 + wcor` for one wavevector or a ladder of multiples.

use anyhow::{bail, Result};
use itfmap_core::fit::loglog_slope;
use itfmap_core::norms::{lp_norm, xstar_norm, Rational};
use itfmap_core::stationary::DecayRow;
use itfmap_core::{build_stationary_state, LatticeVector, Mode, StationaryState};
use rayon::prelude::*;

use super::{keys, solver_options, Outcome, SOLVER_KEYS};
use crate::config::{parse_i64, parse_list, Config};
use crate::inputs::{grid_for, parse_lattice, parse_q, potential, FieldSource, GRID_KEYS};

const OWN: [&str; 4] = ["potential", "q", "k", "ladder"];

pub fn allowed() -> Vec<&'static str> {
    keys(&[&OWN, &GRID_KEYS, &SOLVER_KEYS])
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outcome> {
    let source = FieldSource::parse(cfg, cfg.require("potential")?, false)?;
    let grid = grid_for(cfg, &[&source])?;
    let q = cfg.get("q", Rational::new(3, 2), parse_q)?;
    let v = potential(source.sample(&grid, seed, 0)?, q)?;
    let opts = solver_options(cfg)?;
    let n = grid.dim();
    let k = match cfg.raw("k") {
        Some(s) => parse_lattice(s, n)?,
        None => {
            let mut c = vec![0; n];
            c[0] = 4;
            LatticeVector::new(&c)
        }
    };
    let ladder = cfg.get("ladder", vec![1], |s| parse_list(s, parse_i64))?;
    if ladder.iter().any(|&s| s <= 0) {
        bail!("ladder entries must be positive multiples of k");
    }

    let states: Vec<StationaryState> = ladder
        .par_iter()
        .map(|&s| build_stationary_state(&v, &k.scale(s), &opts))
        .collect::<Result<_, _>>()?;

    let p = v.table().p.to_f64();
    let mut out = Outcome::default();
    let mut rows = vec![DecayRow::csv_header(n)];
    let mut lambdas = Vec::new();
    let mut values = Vec::new();
    for (j, s) in states.iter().enumerate() {
        let norm_value = match opts.mode {
            Mode::Nonendpoint => lp_norm(&s.wcor, p)?,
            Mode::Endpoint => xstar_norm(&s.wcor, s.lambda, n)?,
        };
        let row = DecayRow {
            k: s.k,
            lambda: s.lambda,
            omega: s.omega,
            iterations: s.neumann.iterations,
            contraction: s.neumann.contraction_estimate,
            residual: s.residual,
            norm_value,
            v_lambda: None,
        };
        rows.push(row.csv(n));
        lambdas.push(s.lambda);
        values.push(norm_value);
        let suffix = if ladder.len() == 1 {
            String::new()
        } else {
            format!("_{j:02}")
        };
        let extra = format!(
            "k={}",
            s.k.0[..n]
                .iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        );
        out.artifacts
            .field(&format!("w0{suffix}.cfld"), &s.w0, &extra)?;
        out.artifacts
            .field(&format!("wcor{suffix}.cfld"), &s.wcor, &extra)?;
        out.report.push(format!(
            "lambda {:.4}: {} iterations, contraction {:.3}, residual {:.2e}, norm {:.4e}",
            s.lambda, s.neumann.iterations, s.neumann.contraction_estimate, s.residual, norm_value
        ));
    }
    if ladder.len() >= 2 {
        let fit = loglog_slope(&lambdas, &values);
        let bound = match opts.mode {
            Mode::Nonendpoint => v.table().decay_rate(),
            Mode::Endpoint => v.table().endpoint_rate(),
        };
        out.report.push(format!(
            "fitted decay slope {:.4} (estimate guarantees at most -{bound})",
            fit.slope
        ));
    }
    out.artifacts.text("stationary.csv", &rows, "");
    Ok(out)
}
