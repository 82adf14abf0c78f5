//! Smooth compactly supported test profiles and seeded random draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, Grid};

/// `C^inf` step: 0 for `t <= 0`, 1 for `t >= 1`,
/// `s(t) / (s(t) + s(1 - t))` with `s(t) = exp(-1/t)` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let s = |u: f64| (-1.0 / u).exp();
    let a = s(t);
    a / (a + s(1.0 - t))
}

/// Radial cutoff equal to 1 on `r <= inner`, 0 on `r >= outer`.
pub fn radial_window(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - r) / (outer - inner))
}

/// Largest width for which a centred Gaussian is below `1e-12` of its peak
/// outside the central half box, `L / (4 sqrt(2 ln 1e12))`.
pub fn max_gaussian_width(grid: &Grid) -> f64 {
    grid.length() / 4.0 / (2.0 * 1e12f64.ln()).sqrt()
}

/// `a exp(-|x - c|^2 / (2 sigma^2))`, sampled without any cutoff. It is a
/// valid potential when `sigma + |c|_inf` leaves the tail below `1e-12`
/// outside the central half box (see [`max_gaussian_width`]).
pub fn gaussian(grid: &Grid, amplitude: f64, sigma: f64, center: &[f64]) -> Field {
    Field::from_real_fn(grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

/// Analytic transform of the Gaussian of [`gaussian`]:
/// `a sigma^n exp(-sigma^2 |xi|^2 / 2) exp(-i xi.c)`.
pub fn gaussian_transform(
    dim: usize,
    amplitude: f64,
    sigma: f64,
    center: &[f64],
    xi: &[f64],
) -> Complex64 {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let phase: f64 = xi.iter().zip(center).map(|(a, b)| a * b).sum();
    Complex64::from_polar(
        amplitude * sigma.powi(dim as i32) * (-sigma * sigma * xi2 / 2.0).exp(),
        -phase,
    )
}

/// Deterministic generator for task `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random smooth complex field supported in the ball of radius
/// `0.2 L`: a sum of a few Gaussian bumps with random centres, widths and
/// complex amplitudes.
pub fn random_bump_field<R: Rng>(grid: &Grid, rng: &mut R) -> Field {
    let dim = grid.dim();
    let l = grid.length();
    let bumps: Vec<([f64; 3], f64, Complex64)> = (0..4)
        .map(|_| {
            let mut c = [0.0; 3];
            for v in c.iter_mut().take(dim) {
                *v = rng.gen_range(-0.06..0.06) * l;
            }
            let width = rng.gen_range(0.03..0.07) * l;
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, width, amp)
        })
        .collect();
    let outer = 0.2 * l;
    Field::from_fn(grid, |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = radial_window(r, 0.8 * outer, outer);
        if w == 0.0 {
            return Complex64::default();
        }
        let s: Complex64 = bumps
            .iter()
            .map(|(c, width, amp)| {
                let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
                amp * (-d2 / (2.0 * width * width)).exp()
            })
            .sum();
        s * w
    })
}

/// Random complex samples with independent uniform parts in `[-1, 1)`.
pub fn random_field<R: Rng>(grid: &Grid, rng: &mut R) -> Field {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Field::from_values(grid, crate::grid::Rep::Spatial, values).expect("length matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn widest_gaussian_meets_the_support_rule() {
        let g = Grid::new(2, 64, 10.0).unwrap();
        let v = gaussian(&g, 2.0, max_gaussian_width(&g), &[0.0, 0.0]);
        for (i, x) in v.values().iter().enumerate() {
            if !g.in_central_half(i) {
                assert!(x.norm() <= 2e-12 * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = rng_for(7, 1).gen();
        let b: u64 = rng_for(7, 1).gen();
        let c: u64 = rng_for(7, 2).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
