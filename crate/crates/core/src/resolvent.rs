//! The Helmholtz solution operator `P_lambda` and frequency projections.
//!
//! `P_lambda` is the Fourier multiplier `1 / (lambda^2 - |xi|^2 + i eps lambda)`,
//! the outgoing limiting-absorption version of the principal-value inverse
//! of `Δ + lambda^2`. It zeroes the unpaired Nyquist shell. On the grid,
//! `(Δ + lambda^2 + i eps lambda) P_lambda f = f` minus the Nyquist part of `f`.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rep};
use crate::norms::{critical_exponents, exponents, lp_norm, Exponent, Rational};
use crate::profiles::smooth_step;

/// How the absorption `eps` is chosen for a given `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    /// `eps = lambda * 2 pi / L`.
    Default,
    /// A fixed `eps`.
    Fixed(f64),
    /// `eps = c / lambda`, so the imaginary shift `eps lambda = c` is constant.
    InverseLambda(f64),
}

impl EpsilonRule {
    pub fn epsilon(&self, grid: &Grid, lambda: f64) -> f64 {
        match *self {
            EpsilonRule::Default => lambda * grid.freq_step(),
            EpsilonRule::Fixed(eps) => eps,
            EpsilonRule::InverseLambda(c) => c / lambda,
        }
    }
}

/// Energy, absorption and grid of one resolvent. The multiplier table is
/// built on first use and shared by clones.
#[derive(Clone, Debug)]
pub struct ResolventConfig {
    grid: Grid,
    lambda: f64,
    epsilon: f64,
    table: Arc<OnceLock<Vec<Complex64>>>,
}

impl ResolventConfig {
    /// Default absorption `eps = lambda * 2 pi / L`.
    pub fn new(grid: &Grid, lambda: f64) -> Result<Self> {
        Self::with_rule(grid, lambda, EpsilonRule::Default)
    }

    pub fn with_rule(grid: &Grid, lambda: f64, rule: EpsilonRule) -> Result<Self> {
        Self::with_epsilon(grid, lambda, rule.epsilon(grid, lambda))
    }

    pub fn with_epsilon(grid: &Grid, lambda: f64, epsilon: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param(format!(
                "absorption must be positive, got {epsilon}"
            )));
        }
        Ok(ResolventConfig {
            grid: grid.clone(),
            lambda,
            epsilon,
            table: Arc::new(OnceLock::new()),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn table(&self) -> &[Complex64] {
        self.table
            .get_or_init(|| helmholtz_table(&self.grid, self.lambda, self.epsilon))
    }
}

/// Multiplier table of `1 / (lambda^2 - |xi|^2 + i eps lambda)`, Nyquist shell
/// zeroed. Any real `eps` is accepted; exact zeros of the symbol (only
/// possible for `eps = 0` on a lattice shell) are mapped to 0.
pub fn helmholtz_table(grid: &Grid, lambda: f64, epsilon: f64) -> Vec<Complex64> {
    let l2 = lambda * lambda;
    grid.spectral_table(|i| {
        if grid.is_nyquist(i) {
            return Complex64::default();
        }
        let d = Complex64::new(l2 - grid.wavenumber_sq(i), epsilon * lambda);
        if d == Complex64::default() {
            Complex64::default()
        } else {
            d.inv()
        }
    })
}

/// `P_lambda f`, returned in the representation of `f`.
pub fn apply_resolvent(f: &Field, cfg: &ResolventConfig) -> Result<Field> {
    if f.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(f.apply_multiplier(cfg.table()))
}

/// The resolvent multiplier with an arbitrary real absorption, including 0
/// and negative values. Used for refinement and conjugation studies.
pub fn apply_helmholtz_multiplier(f: &Field, lambda: f64, epsilon: f64) -> Field {
    f.apply_multiplier(&helmholtz_table(f.grid(), lambda, epsilon))
}

/// `(Δ + lambda^2 + i eps lambda) f` with the spectral Laplacian.
pub fn helmholtz_operator(f: &Field, lambda: f64, epsilon: f64) -> Field {
    let grid = f.grid().clone();
    let shift = Complex64::new(lambda * lambda, epsilon * lambda);
    let table = grid.spectral_table(|i| shift - grid.wavenumber_sq(i));
    f.apply_multiplier(&table)
}

/// Spectral Laplacian `-|xi|^2`.
pub fn laplacian(f: &Field) -> Field {
    let grid = f.grid().clone();
    let table = grid.spectral_table(|i| Complex64::new(-grid.wavenumber_sq(i), 0.0));
    f.apply_multiplier(&table)
}

/// The fixed Littlewood–Paley bump: 1 for `r <= 2`, 0 for `r >= 4`, and
/// `smooth_step((4 - r) / 2)` in between, where
/// `smooth_step(t) = s(t) / (s(t) + s(1 - t))`, `s(t) = exp(-1/t)`.
pub fn bump(r: f64) -> f64 {
    smooth_step((4.0 - r) / 2.0)
}

/// Which side of a frequency projection to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Below,
    Above,
}

fn radial_multiplier<F: Fn(f64) -> f64 + Sync>(f: &Field, symbol: F) -> Field {
    let grid = f.grid().clone();
    let table = grid.spectral_table(|i| Complex64::new(symbol(grid.wavenumber_sq(i).sqrt()), 0.0));
    f.apply_multiplier(&table)
}

/// `S_{<lambda} f` (multiplier `bump(|xi|/lambda)`) or `S_{>lambda} f`
/// (multiplier `1 - bump(|xi|/lambda)`). These keep the Nyquist shell, so
/// the two pieces sum to `f` exactly.
pub fn lp_project(f: &Field, lambda: f64, which: Band) -> Result<Field> {
    if !(lambda > 0.0) {
        return Err(Error::param(format!(
            "projection scale must be positive, got {lambda}"
        )));
    }
    Ok(match which {
        Band::Below => radial_multiplier(f, |r| bump(r / lambda)),
        Band::Above => radial_multiplier(f, |r| 1.0 - bump(r / lambda)),
    })
}

/// `S_k f` with multiplier `bump(|xi| / 2^{k+1}) - bump(|xi| / 2^k)`.
pub fn dyadic_block(f: &Field, k: i32) -> Field {
    let lo = 2f64.powi(k);
    let hi = 2.0 * lo;
    radial_multiplier(f, |r| bump(r / hi) - bump(r / lo))
}

/// `lambda^{2n(1/p - 1/p_n)} ||P_lambda f||_p / ||f||_{p'}` for
/// `q_n <= p <= p_n` (`p < inf` when n = 2).
pub fn krs_ratio(f: &Field, cfg: &ResolventConfig, p: Exponent) -> Result<f64> {
    let n = f.grid().dim();
    let (q_n, p_n) = critical_exponents(n);
    // Larger exponent means smaller reciprocal.
    if p.recip() > q_n.recip() || p.recip() < p_n.recip() || p.is_infinite() {
        return Err(Error::Exponent(format!(
            "resolvent ratio needs {q_n} <= p <= {p_n}, p finite; got {p}"
        )));
    }
    let table = exponents(n, Rational::from_integer(n as i64))?;
    let power: f64 = num_traits::ToPrimitive::to_f64(&table.krs_power(p)).expect("finite");
    let denom = lp_norm(&f.in_rep(Rep::Spatial), p.dual().to_f64())?;
    if denom == 0.0 {
        return Err(Error::param("resolvent ratio of a zero field"));
    }
    let num = lp_norm(&apply_resolvent(f, cfg)?.in_rep(Rep::Spatial), p.to_f64())?;
    Ok(cfg.lambda().powf(power) * num / denom)
}

/// `lambda^{1/(n+1)} ||P_lambda f||_{p_n} / ||f||_{q_n'}` for n >= 3.
pub fn refined_ratio(f: &Field, cfg: &ResolventConfig) -> Result<f64> {
    let n = f.grid().dim();
    if n < 3 {
        return Err(Error::param("the refined resolvent ratio needs n >= 3"));
    }
    let (q_n, p_n) = critical_exponents(n);
    let denom = lp_norm(&f.in_rep(Rep::Spatial), q_n.dual().to_f64())?;
    if denom == 0.0 {
        return Err(Error::param("resolvent ratio of a zero field"));
    }
    let num = lp_norm(&apply_resolvent(f, cfg)?.in_rep(Rep::Spatial), p_n.to_f64())?;
    Ok(cfg.lambda().powf(1.0 / (n as f64 + 1.0)) * num / denom)
}
