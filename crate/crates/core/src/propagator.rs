//! Strang split-step evolution for `i u_t = -Δu + V u` on the periodic box.
//!
//! One step of size `tau` is
//! `u -> e^{-iV tau/2} F^{-1} e^{-i|xi|^2 tau} F e^{-iV tau/2} u`.
//! Each factor is unitary for real `V`; the kinetic factor acts on the full
//! lattice including the Nyquist row.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rep};
use crate::norms::Trajectory;
use crate::stationary::{Potential, StationaryState};

/// Precomputed factors of one Strang step and of its inverse.
#[derive(Clone, Debug)]
pub struct Stepper {
    grid: Grid,
    tau: f64,
    half_potential: Vec<Complex64>,
    half_potential_inv: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    kinetic_inv: Vec<Complex64>,
}

impl Stepper {
    pub fn new(v: &Field, tau: f64) -> Result<Stepper> {
        v.expect_rep(Rep::Spatial)?;
        let grid = v.grid().clone();
        let half = -0.5 * tau;
        let half_potential: Vec<Complex64> = v
            .values()
            .par_iter()
            .map(|&x| (Complex64::i() * x * half).exp())
            .collect();
        let half_potential_inv = v
            .values()
            .par_iter()
            .map(|&x| (-Complex64::i() * x * half).exp())
            .collect();
        let kinetic =
            grid.spectral_table(|i| Complex64::from_polar(1.0, -grid.wavenumber_sq(i) * tau));
        let kinetic_inv = kinetic.par_iter().map(|z| z.conj()).collect();
        Ok(Stepper {
            grid,
            tau,
            half_potential,
            half_potential_inv,
            kinetic,
            kinetic_inv,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn sandwich(u: &mut Field, outer: &[Complex64], inner: &[Complex64]) {
        debug_assert_eq!(u.rep(), Rep::Spatial);
        u.values_mut()
            .par_iter_mut()
            .zip(outer.par_iter())
            .for_each(|(a, b)| *a *= b);
        u.make_spectral();
        u.values_mut()
            .par_iter_mut()
            .zip(inner.par_iter())
            .for_each(|(a, b)| *a *= b);
        u.make_spatial();
        u.values_mut()
            .par_iter_mut()
            .zip(outer.par_iter())
            .for_each(|(a, b)| *a *= b);
    }

    /// Advance a spatial field by one step.
    pub fn step(&self, u: &mut Field) {
        Self::sandwich(u, &self.half_potential, &self.kinetic);
    }

    /// Exact inverse of [`Stepper::step`].
    pub fn unstep(&self, u: &mut Field) {
        Self::sandwich(u, &self.half_potential_inv, &self.kinetic_inv);
    }
}

fn check_inputs(v: &Potential, f: &Field, t: f64, steps: usize) -> Result<()> {
    if v.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    f.expect_rep(Rep::Spatial)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!(
            "final time must be positive, got {t}"
        )));
    }
    if steps == 0 {
        return Err(Error::param("at least one time step is required"));
    }
    Ok(())
}

/// Step count meeting `tau max|V| <= 0.1` and `tau |xi_max|^2 <= pi/4`.
pub fn default_steps(v: &Potential, t: f64) -> usize {
    let xi_max2 =
        v.grid().dim() as f64 * (v.grid().points() as f64 / 2.0 * v.grid().freq_step()).powi(2);
    let by_potential = (t * v.field().max_abs() / 0.1).ceil();
    let by_kinetic = (t * xi_max2 / (PI / 4.0)).ceil();
    by_potential.max(by_kinetic).max(1.0) as usize
}

/// Log a warning when `tau` exceeds either default step restriction.
pub fn warn_if_coarse(v: &Potential, tau: f64) {
    let vmax = v.field().max_abs();
    if tau * vmax > 0.1 {
        log::warn!(
            "time step {tau:.3e} gives tau*max|V| = {:.3e} > 0.1",
            tau * vmax
        );
    }
    let xi_max2 =
        v.grid().dim() as f64 * (v.grid().points() as f64 / 2.0 * v.grid().freq_step()).powi(2);
    if tau * xi_max2 > PI / 4.0 {
        log::warn!(
            "time step {tau:.3e} gives tau*|xi_max|^2 = {:.3e} > pi/4",
            tau * xi_max2
        );
    }
}

/// Evolve `f` to time `t` in `steps` steps, keeping every `keep`-th frame
/// and both endpoints.
pub fn evolve(v: &Potential, f: &Field, t: f64, steps: usize, keep: usize) -> Result<Trajectory> {
    check_inputs(v, f, t, steps)?;
    let keep = keep.max(1);
    let tau = t / steps as f64;
    warn_if_coarse(v, tau);
    let stepper = Stepper::new(v.field(), tau)?;
    let mut u = f.clone();
    let mut times = vec![0.0];
    let mut frames = vec![u.clone()];
    for j in 1..=steps {
        stepper.step(&mut u);
        if j % keep == 0 || j == steps {
            times.push(j as f64 * tau);
            frames.push(u.clone());
        }
    }
    *times.last_mut().expect("nonempty") = t;
    Trajectory::new(times, frames)
}

/// `U_T f`. `t = 0` returns `f`.
pub fn initial_to_final(v: &Potential, f: &Field, t: f64, steps: usize) -> Result<Field> {
    if t == 0.0 {
        if v.grid() != f.grid() {
            return Err(Error::GridMismatch);
        }
        return Ok(f.clone());
    }
    check_inputs(v, f, t, steps)?;
    let stepper = Stepper::new(v.field(), t / steps as f64)?;
    warn_if_coarse(v, stepper.tau());
    let mut u = f.clone();
    for _ in 0..steps {
        stepper.step(&mut u);
    }
    Ok(u)
}

/// Solve `i v_t = -Δv + conj(V) v` on `[0, T]` with `v(T) = g` as
/// `v(t) = conj(u(T - t))`, where `u` evolves `conj(g)` under `V`.
pub fn final_value_solve(
    v: &Potential,
    g: &Field,
    t: f64,
    steps: usize,
    keep: usize,
) -> Result<Trajectory> {
    let forward = evolve(v, &g.conj(), t, steps, keep)?;
    let times: Vec<f64> = forward.times().iter().rev().map(|s| t - s).collect();
    let mut frames: Vec<Field> = forward
        .into_frames()
        .into_iter()
        .rev()
        .map(|f| f.conj())
        .collect();
    // The last frame is conj(conj(g)); store g itself.
    *frames.last_mut().expect("nonempty") = g.clone();
    let mut times = times;
    times[0] = 0.0;
    Trajectory::new(times, frames)
}

/// Analytic trajectory `e^{-i lambda^2 t} (w0 + wcor)` at `samples + 1`
/// equally spaced times.
pub fn stationary_trajectory(s: &StationaryState, t: f64, samples: usize) -> Result<Trajectory> {
    if !(t > 0.0) || samples == 0 {
        return Err(Error::param("need T > 0 and at least one sample"));
    }
    let w = s.total();
    let l2 = s.lambda * s.lambda;
    let times: Vec<f64> = (0..=samples)
        .map(|j| t * j as f64 / samples as f64)
        .collect();
    let frames = times
        .iter()
        .map(|&ti| w.scale(Complex64::from_polar(1.0, -l2 * ti)))
        .collect();
    Trajectory::new(times, frames)
}

/// Ratio `|u_s - u_ref| / |u_{2s} - u_ref|` with `u_ref` computed with
/// `8 s` steps. Second order gives about 4.2.
pub fn strang_self_convergence(v: &Potential, f: &Field, t: f64, steps: usize) -> Result<f64> {
    let (coarse, (fine, reference)) = rayon::join(
        || initial_to_final(v, f, t, steps),
        || {
            rayon::join(
                || initial_to_final(v, f, t, 2 * steps),
                || initial_to_final(v, f, t, 8 * steps),
            )
        },
    );
    let reference = reference?;
    Ok(coarse?.sub(&reference)?.l2() / fine?.sub(&reference)?.l2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{plane_wave, LatticeVector};
    use crate::norms::{lp_norm, Rational};
    use crate::profiles::gaussian;

    fn q() -> Rational {
        Rational::new(3, 2)
    }

    #[test]
    fn free_lattice_mode_gets_one_phase() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let v = Potential::zero(&g, q()).unwrap();
        let f = plane_wave(&g, &LatticeVector::new(&[3, -2])).conj();
        let t = 0.37;
        let u = initial_to_final(&v, &f, t, 5).unwrap();
        let expected = f.scale(Complex64::from_polar(1.0, -13.0 * t));
        assert!(u.max_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn zero_time_and_bad_inputs() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let v = Potential::zero(&g, q()).unwrap();
        let f = plane_wave(&g, &LatticeVector::new(&[1, 0]));
        assert_eq!(
            initial_to_final(&v, &f, 0.0, 10).unwrap().values(),
            f.values()
        );
        assert!(evolve(&v, &f, 0.0, 10, 1).is_err());
        assert!(evolve(&v, &f, -1.0, 10, 1).is_err());
        assert!(evolve(&v, &f, 1.0, 0, 1).is_err());
        let other = Field::zeros(&Grid::new(2, 32, 1.0).unwrap(), Rep::Spatial);
        assert!(matches!(
            evolve(&v, &other, 1.0, 2, 1),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn keeps_requested_frames() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let v = Potential::zero(&g, q()).unwrap();
        let f = plane_wave(&g, &LatticeVector::new(&[1, 0]));
        let traj = evolve(&v, &f, 1.0, 10, 4).unwrap();
        assert_eq!(traj.times(), &[0.0, 0.4, 0.8, 1.0]);
    }

    #[test]
    fn unitary_for_real_potential() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let v = Potential::new(gaussian(&g, 5.0, 0.15, &[0.2, 0.0]), q()).unwrap();
        let f = gaussian(&g, 1.0, 0.5, &[-0.3, 0.1]).map(|z| z * Complex64::new(1.0, 0.5));
        let u = initial_to_final(&v, &f, 0.5, 100).unwrap();
        assert!((u.l2() - f.l2()).abs() <= 1e-12 * f.l2());
    }

    #[test]
    fn unstep_inverts_step() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let v = gaussian(&g, 2.0, 0.5, &[0.0, 0.0]).map(|z| z * Complex64::new(1.0, -0.3));
        let s = Stepper::new(&v, 0.01).unwrap();
        let f = gaussian(&g, 1.0, 0.6, &[0.3, 0.0]);
        let mut u = f.clone();
        s.step(&mut u);
        s.unstep(&mut u);
        assert!(u.max_diff(&f).unwrap() < 1e-13);
    }

    #[test]
    fn final_value_round_trip() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let v = Potential::new(gaussian(&g, 3.0, 0.2, &[0.0, 0.0]), q()).unwrap();
        let target = gaussian(&g, 1.0, 0.5, &[0.4, 0.0]).map(|z| z * Complex64::new(0.3, 1.0));
        let traj = final_value_solve(&v, &target, 0.3, 64, 8).unwrap();
        assert_eq!(traj.last().values(), target.values());
        assert_eq!(traj.times()[0], 0.0);
        let back = initial_to_final(&v, &traj.frames()[0], 0.3, 64).unwrap();
        assert!(back.sub(&target).unwrap().l2() <= 1e-10 * target.l2());
    }

    #[test]
    fn free_final_value_is_a_phase() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let v = Potential::zero(&g, q()).unwrap();
        let gmode = plane_wave(&g, &LatticeVector::new(&[2, 1]));
        let t = 0.8;
        let traj = final_value_solve(&v, &gmode, t, 8, 1).unwrap();
        for (ti, frame) in traj.times().iter().zip(traj.frames()) {
            let expected = gmode.scale(Complex64::from_polar(1.0, -5.0 * (ti - t)));
            assert!(frame.max_diff(&expected).unwrap() < 1e-12);
        }
    }

    #[test]
    fn stationary_frames_share_norms() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let v = Potential::new(gaussian(&g, 2.0, 0.2, &[0.0, 0.0]), q()).unwrap();
        let s = crate::stationary::build_stationary_state(
            &v,
            &LatticeVector::new(&[5, 0]),
            &Default::default(),
        )
        .unwrap();
        let traj = stationary_trajectory(&s, 1.0, 4).unwrap();
        assert_eq!(traj.frames()[0].values(), s.total().values());
        let n0 = lp_norm(&traj.frames()[0], 3.0).unwrap();
        for f in traj.frames() {
            assert!((lp_norm(f, 3.0).unwrap() - n0).abs() <= 1e-12 * n0);
        }
    }
}
