//! Periodic box discretisation of R^n and complex fields sampled on it.
//!
//! The box is `[-L/2, L/2)^n` with `N` points per axis, `x_j = (j - N/2) h`,
//! `h = L/N`. The dual lattice is `xi_k = 2 pi k / L` for
//! `k in {-N/2, ..., N/2 - 1}^n`; spectral arrays are stored in FFT order
//! (storage index `i` holds `k = i` for `i < N/2` and `k = i - N` otherwise).
//!
//! Spectral values approximate the unitary transform
//! `f^(xi) = (2 pi)^{-n/2} \int f(x) e^{-i x.xi} dx` by the rectangle rule:
//!
//! ```text
//! f^(xi_k) = (2 pi)^{-n/2} h^n sum_j f(x_j) e^{-i xi_k . x_j}
//!          = (2 pi)^{-n/2} h^n (-1)^{k_1 + .. + k_n} DFT[f]_k
//! ```
//!
//! With this scalar a lattice mode `e^{i kappa.x}` maps to a single
//! coefficient of modulus `L^n / (2 pi)^{n/2}`, and Parseval reads
//! `h^n sum |f|^2 = (2 pi / L)^n sum |f^|^2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spatial or spectral representation of a [`Field`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rep {
    Spatial,
    Spectral,
}

/// Integer coordinates of a dual-lattice point; `xi = (2 pi / L) * k`.
/// Components beyond the grid dimension are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub [i64; 3]);

impl LatticeVector {
    pub fn new(components: &[i64]) -> Self {
        let mut k = [0; 3];
        k[..components.len()].copy_from_slice(components);
        LatticeVector(k)
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn dot(&self, other: &LatticeVector) -> i64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 3]
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.map(|c| -c))
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn scale(&self, t: i64) -> LatticeVector {
        LatticeVector(self.0.map(|c| c * t))
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|c| c % 2 == 0)
    }

    pub fn half(&self) -> Option<LatticeVector> {
        self.is_even().then(|| LatticeVector(self.0.map(|c| c / 2)))
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Periodic box with its dual frequency lattice. Cheap to clone.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.length == other.length
    }
}

/// Lines handed to one FFT batch; keeps scratch allocation off the hot path.
const LINE_BATCH: usize = 64;

impl Grid {
    /// `make_grid`: dimension 2 or 3, `points` an even power of two >= 16,
    /// positive box length.
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Grid> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {points}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Grid {
            dim,
            points,
            length,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Dual lattice step `2 pi / L`.
    pub fn freq_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spectral quadrature weight `(2 pi / L)^n`.
    pub fn freq_cell(&self) -> f64 {
        self.freq_step().powi(self.dim as i32)
    }

    /// `L^n`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Largest representable positive lattice index, `N/2 - 1`.
    pub fn max_index(&self) -> i64 {
        self.points as i64 / 2 - 1
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.points;
        let mut idx = [0; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points + i)
    }

    fn signed(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Lattice coordinates of a spectral storage slot.
    pub fn lattice_at(&self, flat: usize) -> LatticeVector {
        let idx = self.multi_index(flat);
        let mut k = [0; 3];
        for axis in 0..self.dim {
            k[axis] = self.signed(idx[axis]);
        }
        LatticeVector(k)
    }

    /// Spectral storage slot of a lattice vector, if it is representable.
    pub fn slot_of(&self, k: &LatticeVector) -> Option<usize> {
        let n = self.points as i64;
        let mut idx = [0usize; 3];
        for (slot, &c) in idx.iter_mut().zip(&k.0).take(self.dim) {
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            *slot = c.rem_euclid(n) as usize;
        }
        if k.0[self.dim..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(self.flat_index(&idx))
    }

    /// Physical position of a spatial sample.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let half = (self.points / 2) as f64;
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = (idx[axis] as f64 - half) * h;
        }
        x
    }

    /// Wavevector of a spectral storage slot.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let k = self.lattice_at(flat);
        let dk = self.freq_step();
        [k.0[0] as f64 * dk, k.0[1] as f64 * dk, k.0[2] as f64 * dk]
    }

    /// `|xi|^2` of a spectral storage slot.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        self.lattice_at(flat).norm_sq() as f64 * self.freq_step().powi(2)
    }

    /// True if any coordinate sits on the unpaired `k = -N/2` row.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        idx[..self.dim].contains(&(self.points / 2))
    }

    /// True if the sample lies in the central half box `|x_i| < L/4`.
    pub fn in_central_half(&self, flat: usize) -> bool {
        let x = self.position(flat);
        x[..self.dim].iter().all(|c| c.abs() < self.length / 4.0)
    }

    /// Snap a physical wavevector to the lattice, rejecting anything that is
    /// off-lattice by more than `1e-9` lattice steps.
    pub fn lattice_point(&self, kappa: &[f64]) -> Result<LatticeVector> {
        if kappa.len() != self.dim {
            return Err(Error::param(format!(
                "wavevector has {} components on a {}-dimensional grid",
                kappa.len(),
                self.dim
            )));
        }
        let dk = self.freq_step();
        let mut k = [0; 3];
        for (axis, &c) in kappa.iter().enumerate() {
            let scaled = c / dk;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-9 {
                return Err(Error::OffLattice(kappa.to_vec()));
            }
            k[axis] = rounded as i64;
        }
        Ok(LatticeVector(k))
    }

    /// `(2 pi)^{-n/2} h^n`, the scalar folded into the forward transform.
    fn transform_scale(&self) -> f64 {
        self.cell_volume() / (2.0 * PI).powf(self.dim as f64 / 2.0)
    }

    fn checkerboard(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        if idx[..self.dim].iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        let n = self.points;
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                data.par_chunks_mut(n * LINE_BATCH)
                    .for_each(|chunk| fft.process(chunk));
                continue;
            }
            let block = stride * n;
            let mut lines = vec![Complex64::default(); data.len()];
            {
                let src: &[Complex64] = data;
                lines
                    .par_chunks_mut(n * LINE_BATCH)
                    .enumerate()
                    .for_each(|(b, chunk)| {
                        for (l, line) in chunk.chunks_mut(n).enumerate() {
                            let line_id = b * LINE_BATCH + l;
                            let base = (line_id / stride) * block + line_id % stride;
                            for (i, slot) in line.iter_mut().enumerate() {
                                *slot = src[base + i * stride];
                            }
                        }
                        fft.process(chunk);
                    });
            }
            for (line_id, line) in lines.chunks(n).enumerate() {
                let base = (line_id / stride) * block + line_id % stride;
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }

    /// Build a spectral multiplier table in storage order.
    pub fn spectral_table<F>(&self, symbol: F) -> Vec<Complex64>
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        (0..self.len()).into_par_iter().map(symbol).collect()
    }
}

/// Complex scalar function sampled on a [`Grid`], row-major.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    rep: Rep,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Grid, rep: Rep) -> Field {
        Field {
            grid: grid.clone(),
            rep,
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, rep: Rep, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            rep,
            values,
        })
    }

    /// Sample a function of position.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Field
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let dim = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.position(i);
                f(&x[..dim])
            })
            .collect();
        Field {
            grid: grid.clone(),
            rep: Rep::Spatial,
            values,
        }
    }

    /// Sample a real function of position.
    pub fn from_real_fn<F>(grid: &Grid, f: F) -> Field
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Field::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_rep(&self, rep: Rep) -> Result<()> {
        if self.rep == rep {
            Ok(())
        } else {
            Err(Error::Representation {
                expected: rep,
                found: self.rep,
            })
        }
    }

    pub fn expect_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn to_spectral(&self) -> Result<Field> {
        self.expect_rep(Rep::Spatial)?;
        let mut out = self.clone();
        out.make_spectral();
        Ok(out)
    }

    pub fn to_spatial(&self) -> Result<Field> {
        self.expect_rep(Rep::Spectral)?;
        let mut out = self.clone();
        out.make_spatial();
        Ok(out)
    }

    /// In-place switch to spectral representation (no-op if already there).
    pub fn make_spectral(&mut self) {
        if self.rep == Rep::Spectral {
            return;
        }
        let grid = self.grid.clone();
        grid.fft_in_place(&mut self.values, false);
        let c = grid.transform_scale();
        self.values
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v *= c * grid.checkerboard(i));
        self.rep = Rep::Spectral;
    }

    /// In-place switch to spatial representation (no-op if already there).
    pub fn make_spatial(&mut self) {
        if self.rep == Rep::Spatial {
            return;
        }
        let grid = self.grid.clone();
        let c = 1.0 / (grid.transform_scale() * grid.len() as f64);
        self.values
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v *= c * grid.checkerboard(i));
        grid.fft_in_place(&mut self.values, true);
        self.rep = Rep::Spatial;
    }

    /// Copy in the requested representation.
    pub fn in_rep(&self, rep: Rep) -> Field {
        let mut out = self.clone();
        match rep {
            Rep::Spatial => out.make_spatial(),
            Rep::Spectral => out.make_spectral(),
        }
        out
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        Field {
            grid: self.grid.clone(),
            rep: self.rep,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with<F>(&self, other: &Field, f: F) -> Result<Field>
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        self.expect_same_grid(other)?;
        other.expect_rep(self.rep)?;
        Ok(Field {
            grid: self.grid.clone(),
            rep: self.rep,
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product; both fields must be spatial.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.expect_rep(Rep::Spatial)?;
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Field {
        assert_eq!(
            self.rep,
            Rep::Spatial,
            "conjugation is defined on spatial fields"
        );
        self.map(|v| v.conj())
    }

    /// Multiply spectral coefficients by a table from [`Grid::spectral_table`].
    /// Returns the result in the input's representation.
    pub fn apply_multiplier(&self, table: &[Complex64]) -> Field {
        assert_eq!(table.len(), self.values.len());
        let rep = self.rep;
        let mut out = self.in_rep(Rep::Spectral);
        out.values
            .par_iter_mut()
            .zip(table.par_iter())
            .for_each(|(v, m)| *v *= m);
        if rep == Rep::Spatial {
            out.make_spatial();
        }
        out
    }

    /// `h^n sum f`.
    pub fn integral(&self) -> Result<Complex64> {
        self.expect_rep(Rep::Spatial)?;
        Ok(self.values.iter().sum::<Complex64>() * self.grid.cell_volume())
    }

    /// `h^n sum f conj(g)`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.expect_rep(Rep::Spatial)?;
        other.expect_rep(Rep::Spatial)?;
        self.expect_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Quadrature L^2 norm in the field's own representation (weight `h^n`
    /// spatially, `(2 pi / L)^n` spectrally).
    pub fn l2(&self) -> f64 {
        let w = match self.rep {
            Rep::Spatial => self.grid.cell_volume(),
            Rep::Spectral => self.grid.freq_cell(),
        };
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise difference in modulus.
    pub fn max_diff(&self, other: &Field) -> Result<f64> {
        self.expect_same_grid(other)?;
        other.expect_rep(self.rep)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Zero the spectral coefficients on the Nyquist shell.
    pub fn without_nyquist(&self) -> Field {
        let rep = self.rep;
        let mut out = self.in_rep(Rep::Spectral);
        let grid = self.grid.clone();
        out.values.par_iter_mut().enumerate().for_each(|(i, v)| {
            if grid.is_nyquist(i) {
                *v = Complex64::default();
            }
        });
        if rep == Rep::Spatial {
            out.make_spatial();
        }
        out
    }
}

/// Forward transform of a spatial field.
pub fn fourier(f: &Field) -> Result<Field> {
    f.to_spectral()
}

/// Inverse transform of a spectral field.
pub fn inverse_fourier(f: &Field) -> Result<Field> {
    f.to_spatial()
}

/// The unimodular lattice wave `e^{-i kappa . x}` with `kappa = (2 pi/L) k`.
pub fn plane_wave(grid: &Grid, k: &LatticeVector) -> Field {
    let kappa = {
        let dk = grid.freq_step();
        [k.0[0] as f64 * dk, k.0[1] as f64 * dk, k.0[2] as f64 * dk]
    };
    let dim = grid.dim();
    Field::from_fn(grid, |x| {
        let phase: f64 = x.iter().zip(&kappa[..dim]).map(|(a, b)| a * b).sum();
        Complex64::from_polar(1.0, -phase)
    })
}

/// [`plane_wave`] for a physical wavevector, rejecting off-lattice input.
pub fn plane_wave_at(grid: &Grid, kappa: &[f64]) -> Result<Field> {
    let k = grid.lattice_point(kappa)?;
    Ok(plane_wave(grid, &k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(2, 63, 1.0).is_err());
        assert!(Grid::new(2, 8, 1.0).is_err());
        assert!(Grid::new(2, 48, 1.0).is_err());
        assert!(Grid::new(2, 64, 0.0).is_err());
        assert!(Grid::new(2, 64, -1.0).is_err());
        assert!(Grid::new(4, 64, 1.0).is_err());
    }

    #[test]
    fn lattice_steps() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        assert_relative_eq!(g.freq_step(), 1.0, epsilon = 1e-15);
        let g = Grid::new(2, 64, 16.0 * PI).unwrap();
        assert_relative_eq!(g.freq_step(), 0.125, epsilon = 1e-15);
        let g = Grid::new(3, 32, 2.0 * PI).unwrap();
        assert_eq!(g.len(), 32768);
        let ks: Vec<i64> = (0..g.len()).map(|i| g.lattice_at(i).0[0]).collect();
        assert_eq!(*ks.iter().min().unwrap(), -16);
        assert_eq!(*ks.iter().max().unwrap(), 15);
        assert_relative_eq!(g.spacing() * g.points() as f64, g.length());
    }

    #[test]
    fn slot_roundtrip() {
        let g = Grid::new(3, 16, 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.slot_of(&g.lattice_at(i)), Some(i));
        }
        assert_eq!(g.slot_of(&LatticeVector::new(&[8, 0, 0])), None);
    }

    #[test]
    fn zero_transforms_to_zero() {
        let g = Grid::new(2, 32, 3.0).unwrap();
        let f = Field::zeros(&g, Rep::Spatial);
        assert_eq!(fourier(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lattice_mode_is_a_single_bin() {
        let g = Grid::new(2, 32, 5.0).unwrap();
        let k = LatticeVector::new(&[3, -5]);
        // plane_wave carries e^{-i kappa.x}, so e^{+i kappa.x} is its conjugate.
        let f = plane_wave(&g, &k).conj();
        let spec = fourier(&f).unwrap();
        let slot = g.slot_of(&k).unwrap();
        let expected = g.volume() / (2.0 * PI);
        for (i, v) in spec.values().iter().enumerate() {
            if i == slot {
                assert_relative_eq!(v.re, expected, max_relative = 1e-12);
                assert!(v.im.abs() < 1e-12 * expected);
            } else {
                assert!(v.norm() < 1e-12 * expected, "leak at {i}: {v}");
            }
        }
    }

    #[test]
    fn gaussian_matches_analytic_transform() {
        let g = Grid::new(2, 128, 40.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
        let spec = fourier(&f).unwrap();
        for (i, v) in spec.values().iter().enumerate() {
            let xi2 = g.wavenumber_sq(i);
            if xi2 > 16.0 {
                continue;
            }
            let exact = (-xi2 / 2.0).exp();
            assert!(
                (v - exact).norm() <= 1e-8 * exact,
                "slot {i}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn plane_wave_basics() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let one = plane_wave(&g, &LatticeVector::default());
        assert!(one
            .values()
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let w = plane_wave(&g, &LatticeVector::new(&[1, 0]));
        assert!(w.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        assert!(plane_wave_at(&g, &[0.5 * g.freq_step(), 0.0]).is_err());
        assert!(plane_wave_at(&g, &[2.0 * g.freq_step(), -g.freq_step()]).is_ok());
    }

    #[test]
    fn plane_waves_are_orthogonal() {
        let g = Grid::new(3, 16, 1.5).unwrap();
        let a = plane_wave(&g, &LatticeVector::new(&[1, 2, -3]));
        let b = plane_wave(&g, &LatticeVector::new(&[1, 2, -2]));
        assert!(a.inner(&b).unwrap().norm() < 1e-13);
        assert_relative_eq!(a.inner(&a).unwrap().re, g.volume(), max_relative = 1e-13);
    }

    #[test]
    fn representation_checks() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = Field::zeros(&g, Rep::Spectral);
        assert!(matches!(fourier(&f), Err(Error::Representation { .. })));
        let s = Field::zeros(&g, Rep::Spatial);
        assert!(inverse_fourier(&s).is_err());
        let other = Field::zeros(&Grid::new(2, 16, 2.0).unwrap(), Rep::Spatial);
        assert!(matches!(s.add(&other), Err(Error::GridMismatch)));
    }
}
