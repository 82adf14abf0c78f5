//! Recovery of `F^ = (V1 - V2)^` at even-lattice frequencies.
//!
//! For a target `xi` and a unit `nu ⊥ xi`, the two incoming directions
//! `lambda omega_{1,2} = ±xi/2 + mu nu` make `w1^0 conj(w2^0) = e^{-i xi.x}`, so
//! `∫ F w1 conj(w2) = (2 pi)^{n/2} F^(xi) + remainder` with a remainder that
//! decays in `lambda`.
//!
//! `xi` is restricted to the even sublattice so that `xi/2` is a lattice
//! vector and both plane waves are exactly periodic. When an axis direction
//! orthogonal to `xi` exists, `nu` is the first such axis and `mu = 2 pi m / L`.
//! Otherwise `nu` is the primitive integer vector orthogonal to `xi` (in 3D,
//! within the plane of the first two axes), scaled by
//! `t = ceil(m / |nu_int|)` integer steps so the rung stays on the lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{loglog_slope, richardson, SlopeFit};
use crate::grid::{plane_wave, Field, Grid, LatticeVector, Rep};
use crate::orthogonality::cancellation_decomposition;
use crate::propagator::initial_to_final;
use crate::stationary::{build_stationary_state, Mode, Potential, StationaryOptions};

/// One `(xi, m)` rung with both lattice wavevectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringConfig {
    pub xi: LatticeVector,
    pub m: i64,
    /// Integer direction orthogonal to `xi`.
    pub nu: LatticeVector,
    /// Number of `nu` steps: `mu nu = (2 pi / L) * steps * nu`.
    pub steps: i64,
    pub mu: f64,
    pub lambda: f64,
    /// `lambda omega1 = xi/2 + mu nu` in lattice units.
    pub k1: LatticeVector,
    /// `lambda omega2 = -xi/2 + mu nu` in lattice units.
    pub k2: LatticeVector,
    pub omega1: [f64; 3],
    pub omega2: [f64; 3],
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn orthogonal_direction(xi: &LatticeVector, dim: usize) -> LatticeVector {
    if let Some(axis) = (0..dim).find(|&j| xi.0[j] == 0) {
        let mut nu = [0; 3];
        nu[axis] = 1;
        return LatticeVector(nu);
    }
    // Every coordinate is nonzero, so the first two are.
    let (a, b) = (xi.0[0], xi.0[1]);
    let d = gcd(a, b);
    LatticeVector::new(&[-b / d, a / d])
}

fn check_target(xi: &LatticeVector, grid: &Grid) -> Result<LatticeVector> {
    if xi.0[grid.dim()..].iter().any(|&c| c != 0) {
        return Err(Error::param(format!(
            "xi {xi} has more components than the grid"
        )));
    }
    if xi.is_zero() {
        return Err(Error::param(
            "xi = 0 is not reachable; F^(0) is handled separately",
        ));
    }
    xi.half()
        .ok_or_else(|| Error::param(format!("xi {xi} is not on the even sublattice")))
}

fn rung(
    xi: &LatticeVector,
    half: &LatticeVector,
    nu: &LatticeVector,
    m: i64,
    steps: i64,
    grid: &Grid,
) -> Result<ScatteringConfig> {
    let dim = grid.dim();
    let shift = nu.scale(steps);
    let k1 = half.add(&shift);
    let k2 = half.neg().add(&shift);
    let limit = grid.points() as i64 / 2;
    for k in [&k1, &k2] {
        if k.0[..dim].iter().any(|c| c.abs() >= limit) {
            return Err(Error::param(format!(
                "rung m = {m} for xi = {xi} needs wavevector {k} outside the grid band"
            )));
        }
    }
    let dk = grid.freq_step();
    let unit = |k: &LatticeVector| {
        let s = k.norm();
        [k.0[0] as f64 / s, k.0[1] as f64 / s, k.0[2] as f64 / s]
    };
    Ok(ScatteringConfig {
        xi: *xi,
        m,
        nu: *nu,
        steps,
        mu: steps as f64 * nu.norm() * dk,
        lambda: k1.norm() * dk,
        omega1: unit(&k1),
        omega2: unit(&k2),
        k1,
        k2,
    })
}

/// Build the rung `m` for target `xi` (lattice units, even, nonzero).
pub fn scattering_vectors(xi: &LatticeVector, m: i64, grid: &Grid) -> Result<ScatteringConfig> {
    let half = check_target(xi, grid)?;
    if m < 1 {
        return Err(Error::param(format!("ladder index must be >= 1, got {m}")));
    }
    let nu = orthogonal_direction(xi, grid.dim());
    debug_assert_eq!(nu.dot(xi), 0);
    rung(
        xi,
        &half,
        &nu,
        m,
        (m as f64 / nu.norm()).ceil() as i64,
        grid,
    )
}

/// Rungs for a strictly increasing ladder. When `|nu|` is long, several
/// ladder entries would round to the same number of steps; each rung is then
/// pushed one step past its predecessor so that `lambda` strictly increases.
pub fn scattering_ladder(
    xi: &LatticeVector,
    ladder: &[i64],
    grid: &Grid,
) -> Result<Vec<ScatteringConfig>> {
    let half = check_target(xi, grid)?;
    if ladder.first().is_some_and(|&m| m < 1) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(format!(
            "ladder must be positive and strictly increasing, got {ladder:?}"
        )));
    }
    let nu = orthogonal_direction(xi, grid.dim());
    let mut prev = 0;
    ladder
        .iter()
        .map(|&m| {
            let steps = ((m as f64 / nu.norm()).ceil() as i64).max(prev + 1);
            prev = steps;
            rung(xi, &half, &nu, m, steps, grid)
        })
        .collect()
}

/// Estimate at one rung.
#[derive(Clone, Debug, PartialEq)]
pub struct RungEstimate {
    pub config: ScatteringConfig,
    /// `(2 pi)^{-n/2} ∫ F w1 conj(w2)`; `None` if a Neumann series failed.
    pub estimate: Option<Complex64>,
    /// `(2 pi)^{-n/2} ∫ F w1^0 conj(w2^0)`.
    pub leading: Option<Complex64>,
    /// Magnitudes of the three remainder integrals, scaled like `estimate`.
    pub remainders: [f64; 3],
}

fn transform_scale(dim: usize) -> f64 {
    (2.0 * PI).powf(-(dim as f64) / 2.0)
}

fn direct_rung(
    v1: &Potential,
    v2: &Potential,
    cfg: ScatteringConfig,
    opts: &StationaryOptions,
) -> Result<RungEstimate> {
    let c = transform_scale(v1.grid().dim());
    let states = rayon::join(
        || build_stationary_state(v1, &cfg.k1, opts),
        || build_stationary_state(&v2.conj(), &cfg.k2, opts),
    );
    match states {
        (Ok(s1), Ok(s2)) => {
            let parts = cancellation_decomposition(v1, v2, &s1, &s2)?;
            Ok(RungEstimate {
                config: cfg,
                estimate: Some(parts.total() * c),
                leading: Some(parts.leading * c),
                remainders: [
                    parts.r1.norm() * c,
                    parts.r2.norm() * c,
                    parts.r3.norm() * c,
                ],
            })
        }
        (Err(Error::NonConvergence(rep)), _) | (_, Err(Error::NonConvergence(rep))) => {
            log::warn!(
                "rung m = {} for xi = {} skipped: Neumann series stopped after {} iterations",
                cfg.m,
                cfg.xi,
                rep.iterations
            );
            Ok(RungEstimate {
                config: cfg,
                estimate: None,
                leading: None,
                remainders: [f64::NAN; 3],
            })
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Estimates of `F^(xi)` along a ladder, from stationary states for `V1` and
/// `conj(V2)`. Rungs are computed in parallel and returned in ladder order.
pub fn fhat_direct(
    v1: &Potential,
    v2: &Potential,
    xi: &LatticeVector,
    ladder: &[i64],
    opts: &StationaryOptions,
) -> Result<Vec<RungEstimate>> {
    v1.field().expect_same_grid(v2.field())?;
    let cfgs = scattering_ladder(xi, ladder, v1.grid())?;
    cfgs.into_par_iter()
        .map(|cfg| direct_rung(v1, v2, cfg, opts))
        .collect()
}

/// A black-box initial-to-final-state map on a grid.
pub trait EvolutionMap: Send + Sync {
    fn grid(&self) -> &Grid;
    fn final_time(&self) -> f64;
    fn apply(&self, f: &Field) -> Result<Field>;
}

/// `U_T` realised by the split-step propagator.
#[derive(Clone, Debug)]
pub struct PropagatorMap {
    pub potential: Potential,
    pub time: f64,
    pub steps: usize,
}

impl EvolutionMap for PropagatorMap {
    fn grid(&self) -> &Grid {
        self.potential.grid()
    }

    fn final_time(&self) -> f64 {
        self.time
    }

    fn apply(&self, f: &Field) -> Result<Field> {
        initial_to_final(&self.potential, f, self.time, self.steps)
    }
}

/// The free map `e^{i T Δ}`, exact in spectral space.
#[derive(Clone, Debug)]
pub struct FreeMap {
    grid: Grid,
    time: f64,
    table: Vec<Complex64>,
}

impl FreeMap {
    pub fn new(grid: &Grid, time: f64) -> FreeMap {
        let table =
            grid.spectral_table(|i| Complex64::from_polar(1.0, -grid.wavenumber_sq(i) * time));
        FreeMap {
            grid: grid.clone(),
            time,
            table,
        }
    }
}

impl EvolutionMap for FreeMap {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn final_time(&self) -> f64 {
        self.time
    }

    fn apply(&self, f: &Field) -> Result<Field> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(f.apply_multiplier(&self.table))
    }
}

/// Data-side estimate
/// `i ∫ (U f - U0 f) conj(g) / (T (2 pi)^{n/2})` with `f = e^{-i k1.x}` and
/// `g = e^{-i lambda^2 T} e^{-i k2.x}`.
///
/// To first order in `V` the pairing equals `T ∫ V e^{-i xi.x}`, so the
/// estimate is the quadrature transform of `V` at `xi` plus a Born error of
/// second order in `V`.
pub fn fhat_from_data(
    u: &dyn EvolutionMap,
    u0: &dyn EvolutionMap,
    cfg: &ScatteringConfig,
) -> Result<Complex64> {
    let grid = u.grid();
    if grid != u0.grid() {
        return Err(Error::GridMismatch);
    }
    let t = u.final_time();
    if (t - u0.final_time()).abs() > 1e-14 * t.abs() || !(t > 0.0) {
        return Err(Error::param(
            "data and reference maps must share a positive final time",
        ));
    }
    let f = plane_wave(grid, &cfg.k1);
    let g =
        plane_wave(grid, &cfg.k2).scale(Complex64::from_polar(1.0, -cfg.lambda * cfg.lambda * t));
    let (a, b) = rayon::join(|| u.apply(&f), || u0.apply(&f));
    let pairing = a?.sub(&b?)?.inner(&g)?;
    Ok(Complex64::i() * pairing * transform_scale(grid.dim()) / t)
}

/// Where the spectrum estimates come from.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    /// Stationary states for known `V1` and `V2`.
    Direct {
        v1: &'a Potential,
        v2: &'a Potential,
    },
    /// A measured map `U` against the free map `U0`.
    Data {
        map: &'a dyn EvolutionMap,
        free: &'a dyn EvolutionMap,
    },
}

impl Source<'_> {
    fn grid(&self) -> &Grid {
        match self {
            Source::Direct { v1, .. } => v1.grid(),
            Source::Data { map, .. } => map.grid(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoverOptions {
    pub ladder: Vec<i64>,
    pub stationary: StationaryOptions,
    /// Richardson-extrapolate the last two converged rungs.
    pub extrapolate: bool,
    /// Known rate for extrapolation; defaults to the mode's rate for direct
    /// sources.
    pub delta: Option<f64>,
    /// Fill `F^(-xi) = conj(F^(xi))`, valid for real `F`.
    pub conjugate_fill: bool,
    /// `F` itself, when known: fills `F^(0)` and enables error reporting.
    pub ground_truth: Option<Field>,
}

impl RecoverOptions {
    pub fn new(ladder: Vec<i64>) -> Self {
        RecoverOptions {
            ladder,
            stationary: StationaryOptions::default(),
            extrapolate: false,
            delta: None,
            conjugate_fill: true,
            ground_truth: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct XiReport {
    pub xi: LatticeVector,
    pub rungs: Vec<RungEstimate>,
    pub extrapolated: Option<Complex64>,
    /// Extrapolated value if requested and available, else the top
    /// converged rung.
    pub final_estimate: Option<Complex64>,
    /// Log-log slope of successive rung increments against `lambda`.
    pub increment_slope: SlopeFit,
    /// Quadrature transform of the ground truth, when supplied.
    pub reference: Option<Complex64>,
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub entries: Vec<XiReport>,
    /// `F^(0)`; `None` is a hole the scheme cannot fill.
    pub zero_mode: Option<Complex64>,
    pub recovered: Field,
    /// Relative L^2 error on the central half box.
    pub relative_error: Option<f64>,
}

impl ReconstructionReport {
    pub fn csv_header(dim: usize) -> String {
        let xi: Vec<String> = (0..dim).map(|i| format!("xi{i}")).collect();
        format!("{},m,lambda,fhat_re,fhat_im,rem1,rem2,rem3", xi.join(","))
    }

    pub fn csv_rows(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.entries {
            let xi: Vec<String> = e.xi.0[..dim].iter().map(|c| c.to_string()).collect();
            for r in &e.rungs {
                let est = r.estimate.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                out.push(format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    xi.join(","),
                    r.config.m,
                    r.config.lambda,
                    est.re,
                    est.im,
                    r.remainders[0],
                    r.remainders[1],
                    r.remainders[2]
                ));
            }
        }
        out
    }
}

/// Nonzero even-lattice vectors with `|xi| <= radius` (lattice units),
/// in lexicographic order.
pub fn xi_band(grid: &Grid, radius: f64) -> Vec<LatticeVector> {
    let r = radius.floor() as i64;
    let r = r - r.rem_euclid(2);
    let range: Vec<i64> = (-r..=r).step_by(2).collect();
    let mut out = Vec::new();
    let dim = grid.dim();
    let mut push = |k: LatticeVector| {
        if !k.is_zero() && (k.norm_sq() as f64) <= radius * radius {
            out.push(k);
        }
    };
    for &a in &range {
        for &b in &range {
            if dim == 2 {
                push(LatticeVector::new(&[a, b]));
            } else {
                for &c in &range {
                    push(LatticeVector::new(&[a, b, c]));
                }
            }
        }
    }
    out
}

/// True for the representative of `{xi, -xi}` whose first nonzero
/// coordinate is positive.
fn is_canonical(xi: &LatticeVector) -> bool {
    xi.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Relative L^2 distance on the central half box.
pub fn central_relative_error(recovered: &Field, truth: &Field) -> Result<f64> {
    let grid = truth.grid();
    recovered.expect_same_grid(truth)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in (0..grid.len()).filter(|&i| grid.in_central_half(i)) {
        num += (recovered.values()[i] - truth.values()[i]).norm_sqr();
        den += truth.values()[i].norm_sqr();
    }
    Ok(if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    })
}

/// Estimate `F^` on `xi_set`, assemble the spectrum on the even sublattice
/// and transform back.
///
/// Sampling the spectrum on even bins periodises `F` with period `L/2`. Since
/// `F` lives in the central half box, `2^n` times the inverse transform
/// reproduces `F` there.
pub fn recover_potential(
    source: Source<'_>,
    xi_set: &[LatticeVector],
    opts: &RecoverOptions,
) -> Result<ReconstructionReport> {
    if xi_set.is_empty() {
        return Err(Error::param("empty frequency set"));
    }
    if opts.ladder.is_empty() {
        return Err(Error::param("empty ladder"));
    }
    let grid = source.grid().clone();
    if let Source::Direct { v1, v2 } = source {
        v1.field().expect_same_grid(v2.field())?;
    }
    if let Some(truth) = &opts.ground_truth {
        truth.expect_same_grid(&Field::zeros(&grid, Rep::Spatial))?;
    }
    let mut targets: Vec<LatticeVector> = xi_set.to_vec();
    if opts.conjugate_fill {
        targets = targets
            .into_iter()
            .map(|x| if is_canonical(&x) { x } else { x.neg() })
            .collect();
    }
    targets.sort();
    targets.dedup();

    let mut cfgs: Vec<ScatteringConfig> = Vec::with_capacity(targets.len() * opts.ladder.len());
    for xi in &targets {
        cfgs.extend(scattering_ladder(xi, &opts.ladder, &grid)?);
    }
    let rungs: Vec<RungEstimate> = cfgs
        .into_par_iter()
        .map(|cfg| match source {
            Source::Direct { v1, v2 } => direct_rung(v1, v2, cfg, &opts.stationary),
            Source::Data { map, free } => {
                let est = fhat_from_data(map, free, &cfg)?;
                Ok(RungEstimate {
                    config: cfg,
                    estimate: Some(est),
                    leading: None,
                    remainders: [f64::NAN; 3],
                })
            }
        })
        .collect::<Result<_>>()?;

    let delta = opts.delta.or_else(|| match source {
        Source::Direct { v1, .. } => {
            let t = v1.table();
            let rate = match opts.stationary.mode {
                Mode::Nonendpoint => t.decay_rate(),
                Mode::Endpoint => t.endpoint_rate(),
            };
            num_traits::ToPrimitive::to_f64(&rate)
        }
        Source::Data { .. } => None,
    });

    let truth_spec = match &opts.ground_truth {
        Some(t) => Some(t.to_spectral()?),
        None => None,
    };
    let per_xi = opts.ladder.len();
    let entries: Vec<XiReport> = targets
        .iter()
        .zip(rungs.chunks(per_xi))
        .map(|(xi, rs)| {
            let good: Vec<&RungEstimate> = rs.iter().filter(|r| r.estimate.is_some()).collect();
            let top = good.last().and_then(|r| r.estimate);
            let extrapolated = match (opts.extrapolate, delta, good.len()) {
                (true, Some(d), n) if n >= 2 => {
                    let (a, b) = (good[n - 2], good[n - 1]);
                    Some(richardson(
                        a.config.lambda,
                        a.estimate.unwrap(),
                        b.config.lambda,
                        b.estimate.unwrap(),
                        d,
                    ))
                }
                _ => None,
            };
            let increments: Vec<(f64, f64)> = good
                .windows(2)
                .map(|w| {
                    (
                        w[1].config.lambda,
                        (w[1].estimate.unwrap() - w[0].estimate.unwrap()).norm(),
                    )
                })
                .collect();
            let xs: Vec<f64> = increments.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = increments.iter().map(|p| p.1).collect();
            XiReport {
                xi: *xi,
                rungs: rs.to_vec(),
                extrapolated,
                final_estimate: extrapolated.or(top),
                increment_slope: loglog_slope(&xs, &ys),
                reference: truth_spec
                    .as_ref()
                    .and_then(|s| grid.slot_of(xi).map(|i| s.values()[i])),
            }
        })
        .collect();

    let mut spectrum = Field::zeros(&grid, Rep::Spectral);
    for e in &entries {
        let Some(value) = e.final_estimate else {
            continue;
        };
        if let Some(i) = grid.slot_of(&e.xi) {
            spectrum.values_mut()[i] = value;
        }
        if opts.conjugate_fill {
            if let Some(i) = grid.slot_of(&e.xi.neg()) {
                spectrum.values_mut()[i] = value.conj();
            }
        }
    }
    let zero_mode = truth_spec.as_ref().map(|s| s.values()[0]);
    if let Some(z) = zero_mode {
        spectrum.values_mut()[0] = z;
    }
    let recovered = spectrum
        .to_spatial()?
        .scale(Complex64::new(2f64.powi(grid.dim() as i32), 0.0));
    let relative_error = match &opts.ground_truth {
        Some(t) => Some(central_relative_error(&recovered, t)?),
        None => None,
    };
    Ok(ReconstructionReport {
        entries,
        zero_mode,
        recovered,
        relative_error,
    })
}
