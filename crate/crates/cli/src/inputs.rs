//! Turning config values into grids, potentials and fields.
//!
//! A potential or state is either a path to a CFLD file or a profile:
//!
//! - `gaussian:A:SIGMA[:C1:C2[:C3]]`: `A exp(-|x - c|^2 / (2 SIGMA^2))`.
//! - `power:A:ALPHA:R`: `A |x|^{-ALPHA}` smoothly cut off between `R/2` and
//!   `R`. The origin sample uses `|x| = h/2`.
//!
//! Initial states may also be `bumps`, a random smooth field drawn from the
//! run seed.

use anyhow::{anyhow, bail, Context, Result};
use itfmap_core::norms::{parse_rational, Rational};
use itfmap_core::profiles::{gaussian, radial_window, random_bump_field, rng_for};
use itfmap_core::{cfld, EpsilonRule, Field, Grid, LatticeVector, Mode, Potential, Rep};

use crate::config::{parse_f64, parse_i64, parse_list, parse_usize, Config};

pub const GRID_KEYS: [&str; 3] = ["n", "points", "length"];

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Gaussian {
        amplitude: f64,
        sigma: f64,
        center: Vec<f64>,
    },
    Power {
        amplitude: f64,
        alpha: f64,
        radius: f64,
    },
}

impl Profile {
    pub fn parse(s: &str) -> Result<Profile> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let nums = |from: usize| -> Result<Vec<f64>> {
            parts[from..].iter().map(|p| parse_f64(p)).collect()
        };
        match parts[0] {
            "gaussian" => {
                let v = nums(1)?;
                if v.len() < 2 {
                    bail!("gaussian profile needs gaussian:A:SIGMA[:C1:C2[:C3]], got {s:?}");
                }
                if !(v[1] > 0.0) {
                    bail!("gaussian width must be positive");
                }
                Ok(Profile::Gaussian {
                    amplitude: v[0],
                    sigma: v[1],
                    center: v[2..].to_vec(),
                })
            }
            "power" => {
                let v = nums(1)?;
                if v.len() != 3 {
                    bail!("power profile needs power:A:ALPHA:R, got {s:?}");
                }
                if !(v[1] >= 0.0 && v[2] > 0.0) {
                    bail!("power profile needs ALPHA >= 0 and R > 0");
                }
                Ok(Profile::Power {
                    amplitude: v[0],
                    alpha: v[1],
                    radius: v[2],
                })
            }
            other => bail!("unknown profile {other:?}; expected gaussian or power"),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        match self {
            Profile::Gaussian {
                amplitude,
                sigma,
                center,
            } => {
                let mut c = center.clone();
                if c.is_empty() {
                    c = vec![0.0; grid.dim()];
                }
                if c.len() != grid.dim() {
                    bail!(
                        "gaussian centre has {} coordinates on a {}-dimensional grid",
                        c.len(),
                        grid.dim()
                    );
                }
                Ok(gaussian(grid, *amplitude, *sigma, &c))
            }
            Profile::Power {
                amplitude,
                alpha,
                radius,
            } => {
                let floor = grid.spacing() / 2.0;
                Ok(Field::from_real_fn(grid, |x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let w = radial_window(r, radius / 2.0, *radius);
                    if w == 0.0 {
                        0.0
                    } else {
                        amplitude * r.max(floor).powf(-alpha) * w
                    }
                }))
            }
        }
    }
}

/// Where a field comes from.
#[derive(Clone, Debug)]
pub enum FieldSource {
    File(Field),
    Profile(Profile),
    Bumps,
}

impl FieldSource {
    pub fn parse(cfg: &Config, value: &str, allow_bumps: bool) -> Result<FieldSource> {
        if value.ends_with(".cfld") {
            let path = cfg.path(value);
            let f =
                cfld::read_file(&path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(FieldSource::File(f.in_rep(Rep::Spatial)));
        }
        if value == "bumps" {
            if !allow_bumps {
                bail!("random bumps are only accepted for states, not potentials");
            }
            return Ok(FieldSource::Bumps);
        }
        Profile::parse(value).map(FieldSource::Profile)
    }

    pub fn grid(&self) -> Option<&Grid> {
        match self {
            FieldSource::File(f) => Some(f.grid()),
            _ => None,
        }
    }

    /// `stream` separates the random draws of different inputs.
    pub fn sample(&self, grid: &Grid, seed: u64, stream: u64) -> Result<Field> {
        match self {
            FieldSource::File(f) => resample(f, grid),
            FieldSource::Profile(p) => p.sample(grid),
            FieldSource::Bumps => Ok(random_bump_field(grid, &mut rng_for(seed, stream))),
        }
    }
}

/// Grid from `n`, `points`, `length`; files fix the grid themselves, and
/// any grid keys given alongside must agree with it.
pub fn grid_for(cfg: &Config, sources: &[&FieldSource]) -> Result<Grid> {
    let from_file = sources.iter().find_map(|s| s.grid()).cloned();
    let keyed = GRID_KEYS.iter().any(|k| cfg.has(k));
    let grid = match (&from_file, keyed) {
        (Some(g), false) => g.clone(),
        _ => {
            let n = cfg.get("n", 2, parse_usize)?;
            let points = cfg.get("points", 64, parse_usize)?;
            let length = cfg.get("length", 2.0 * std::f64::consts::PI, parse_f64)?;
            Grid::new(n, points, length)?
        }
    };
    for s in sources {
        if let Some(g) = s.grid() {
            if g != &grid {
                bail!(
                    "field file grid (n={}, N={}, L={}) does not match the configured grid (n={}, N={}, L={})",
                    g.dim(),
                    g.points(),
                    g.length(),
                    grid.dim(),
                    grid.points(),
                    grid.length()
                );
            }
        }
    }
    Ok(grid)
}

/// Spectral interpolation or truncation onto a grid with the same box.
pub fn resample(f: &Field, target: &Grid) -> Result<Field> {
    if f.grid() == target {
        return Ok(f.in_rep(Rep::Spatial));
    }
    let src = f.grid();
    if src.dim() != target.dim() || (src.length() - target.length()).abs() > 1e-12 * src.length() {
        bail!("cannot resample between boxes of different size or dimension");
    }
    let spec = f.to_spectral()?;
    let mut out = Field::zeros(target, Rep::Spectral);
    for i in 0..target.len() {
        if target.is_nyquist(i) {
            continue;
        }
        if let Some(j) = src.slot_of(&target.lattice_at(i)) {
            if !src.is_nyquist(j) {
                out.values_mut()[i] = spec.values()[j];
            }
        }
    }
    Ok(out.to_spatial()?)
}

pub fn potential(field: Field, q: Rational) -> Result<Potential> {
    Potential::new(field, q).context("invalid potential")
}

pub fn parse_q(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    Ok(s.trim().parse::<Mode>()?)
}

/// `default`, `fixed:EPS` or `inverse:C` (`eps = C / lambda`).
pub fn parse_epsilon(s: &str) -> Result<EpsilonRule> {
    let s = s.trim();
    if s == "default" {
        return Ok(EpsilonRule::Default);
    }
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("expected default, fixed:EPS or inverse:C"))?;
    let v = parse_f64(value)?;
    if !(v > 0.0) {
        bail!("absorption parameter must be positive");
    }
    match kind.trim() {
        "fixed" => Ok(EpsilonRule::Fixed(v)),
        "inverse" => Ok(EpsilonRule::InverseLambda(v)),
        other => bail!("unknown absorption rule {other:?}"),
    }
}

pub fn parse_lattice(s: &str, dim: usize) -> Result<LatticeVector> {
    let c = parse_list(s, parse_i64)?;
    if c.len() != dim {
        bail!("lattice vector {s:?} needs {dim} components");
    }
    Ok(LatticeVector::new(&c))
}

pub fn format_f(x: f64) -> String {
    format!("{x:.16e}")
}
