//! Exponent bookkeeping and the norm functionals.
//!
//! Exponents are carried as exact reciprocals (`1/p`, with `1/inf = 0`), so
//! the Hölder, Sobolev and Strichartz relations are checked in rational
//! arithmetic.

use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rep};

pub type Rational = Ratio<i64>;

/// A Lebesgue exponent in `[1, inf]`, stored as its reciprocal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    recip: Rational,
}

impl Exponent {
    pub fn infinity() -> Exponent {
        Exponent {
            recip: Rational::zero(),
        }
    }

    pub fn from_recip(recip: Rational) -> Exponent {
        Exponent { recip }
    }

    pub fn new(value: Rational) -> Exponent {
        Exponent {
            recip: value.recip(),
        }
    }

    pub fn integer(value: i64) -> Exponent {
        Exponent::new(Rational::from_integer(value))
    }

    pub fn recip(&self) -> Rational {
        self.recip
    }

    /// `None` for infinity.
    pub fn value(&self) -> Option<Rational> {
        (!self.recip.is_zero()).then(|| self.recip.recip())
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        match self.value() {
            Some(v) => v.to_f64().expect("finite rational"),
            None => f64::INFINITY,
        }
    }

    /// Hölder conjugate `p'`.
    pub fn dual(&self) -> Exponent {
        Exponent {
            recip: Rational::one() - self.recip,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "inf"),
            Some(v) if v.is_integer() => write!(f, "{}", v.numer()),
            Some(v) => write!(f, "{}/{}", v.numer(), v.denom()),
        }
    }
}

/// Parse `"3/2"`, `"1.5"`, `"6"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Exponent(format!("cannot parse {s:?} as a rational number"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let frac = if negative { -frac } else { frac };
        return Ok(Rational::new(int * scale + frac, scale));
    }
    s.parse::<i64>()
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// All exponents attached to a dimension `n` and potential exponent `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentTable {
    pub n: usize,
    /// Tomas–Stein exponent, `1/q_n = 1/2 - 1/(n+1)`.
    pub q_n: Exponent,
    /// Sobolev exponent, `1/p_n = 1/2 - 1/n` (infinite for n = 2).
    pub p_n: Exponent,
    /// Potential exponent after clamping to `(n+1)/2`.
    pub q: Exponent,
    /// Solution exponent, `1/q + 2/p = 1`.
    pub p: Exponent,
    /// Strichartz partner of `p`, `2/r + n/p = n/2`.
    pub r: Exponent,
    /// The `q` that was asked for.
    pub requested_q: Rational,
    pub clamped: bool,
}

/// Build the exponent table for `(n, q)`.
///
/// Admissible input: `q > 1` if `n = 2` and `q >= n/2` if `n >= 3`. Values above
/// `(n+1)/2` are clamped down to it, as the smaller exponent is the stronger
/// hypothesis on a compactly supported potential.
pub fn exponents(n: usize, q: Rational) -> Result<ExponentTable> {
    if !(2..=3).contains(&n) {
        return Err(Error::Exponent(format!(
            "dimension must be 2 or 3, got {n}"
        )));
    }
    let ni = n as i64;
    let half = Rational::new(1, 2);
    let lower_ok = if n == 2 {
        q > Rational::one()
    } else {
        q >= Rational::new(ni, 2)
    };
    if !lower_ok {
        return Err(Error::Exponent(format!(
            "q = {} is not admissible for n = {n}: need q > 1 if n = 2 and q >= n/2 if n >= 3",
            Exponent::new(q)
        )));
    }
    let upper = Rational::new(ni + 1, 2);
    let clamped = q > upper;
    let q_eff = if clamped { upper } else { q };

    let inv_qn = half - Rational::new(1, ni + 1);
    let inv_pn = half - Rational::new(1, ni);
    let inv_q = q_eff.recip();
    let inv_p = (Rational::one() - inv_q) / 2;
    let inv_r = Rational::from_integer(ni) * (half - inv_p) / 2;

    let table = ExponentTable {
        n,
        q_n: Exponent::from_recip(inv_qn),
        p_n: Exponent::from_recip(inv_pn),
        q: Exponent::from_recip(inv_q),
        p: Exponent::from_recip(inv_p),
        r: Exponent::from_recip(inv_r),
        requested_q: q,
        clamped,
    };
    table.check()?;
    Ok(table)
}

impl ExponentTable {
    fn check(&self) -> Result<()> {
        let half = Rational::new(1, 2);
        let in_range = |e: &Exponent| e.recip() >= Rational::zero() && e.recip() <= half;
        if !in_range(&self.p) || !in_range(&self.r) {
            return Err(Error::Exponent(format!(
                "Strichartz pair (r, p) = ({}, {}) leaves [2, inf]",
                self.r, self.p
            )));
        }
        if self.n == 2 && self.r.recip() == half && self.p.is_infinite() {
            return Err(Error::Exponent(
                "the pair (n, r, p) = (2, 2, inf) is excluded".into(),
            ));
        }
        let ni = Rational::from_integer(self.n as i64);
        debug_assert_eq!(self.r.recip() * 2 + ni * self.p.recip(), ni / 2);
        debug_assert_eq!(self.q.recip() + self.p.recip() * 2, Rational::one());
        Ok(())
    }

    /// True when `q = n/2` (the critical case, only reachable for n = 3).
    pub fn is_endpoint(&self) -> bool {
        self.q.recip() == Rational::new(2, self.n as i64)
    }

    /// Rate `n (2/n - 1/q)` of the non-endpoint decay estimate.
    pub fn decay_rate(&self) -> Rational {
        let ni = self.n as i64;
        Rational::from_integer(ni) * (Rational::new(2, ni) - self.q.recip())
    }

    /// Rate `1/(n+1)` of the endpoint decay estimate.
    pub fn endpoint_rate(&self) -> Rational {
        Rational::new(1, self.n as i64 + 1)
    }

    /// Exponent `2n (1/p - 1/p_n)` of the L^{p'} -> L^p resolvent bound.
    pub fn krs_power(&self, p: Exponent) -> Rational {
        Rational::from_integer(2 * self.n as i64) * (p.recip() - self.p_n.recip())
    }
}

/// Tomas–Stein and Sobolev exponents for dimension `n`.
pub fn critical_exponents(n: usize) -> (Exponent, Exponent) {
    let ni = n as i64;
    let half = Rational::new(1, 2);
    (
        Exponent::from_recip(half - Rational::new(1, ni + 1)),
        Exponent::from_recip(half - Rational::new(1, ni)),
    )
}

/// Time samples with one spatial frame each.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    frames: Vec<Field>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, frames: Vec<Field>) -> Result<Trajectory> {
        let first = frames
            .first()
            .ok_or_else(|| Error::param("empty trajectory"))?;
        if times.len() != frames.len() {
            return Err(Error::param("times and frames differ in length"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("trajectory times must be strictly increasing"));
        }
        if times[0] != 0.0 {
            return Err(Error::param("trajectory must start at t = 0"));
        }
        let grid = first.grid().clone();
        for f in &frames {
            f.expect_rep(Rep::Spatial)?;
            if f.grid() != &grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Trajectory {
            grid,
            times,
            frames,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("nonempty")
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Exponent(format!("L^p norm needs p >= 1, got {p}")));
    }
    Ok(())
}

fn lp_of_moduli(moduli: impl Iterator<Item = f64> + Clone, weight: f64, p: f64) -> f64 {
    let max = moduli.clone().fold(0.0f64, f64::max);
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    let s: f64 = moduli.map(|a| (a / max).powf(p)).sum();
    max * (weight * s).powf(1.0 / p)
}

/// `(h^n sum |f|^p)^{1/p}`; the max norm for `p = inf`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent(p)?;
    f.expect_rep(Rep::Spatial)?;
    Ok(lp_of_moduli(
        f.values().iter().map(|v| v.norm()),
        f.grid().cell_volume(),
        p,
    ))
}

/// `(int_0^T ||u(t)||_p^r dt)^{1/r}` by the trapezoid rule; sup over frames
/// for `r = inf`.
pub fn mixed_norm(u: &Trajectory, r: f64, p: f64) -> Result<f64> {
    check_exponent(r)?;
    let norms = u
        .frames()
        .iter()
        .map(|f| lp_norm(f, p))
        .collect::<Result<Vec<_>>>()?;
    if r.is_infinite() {
        return Ok(norms.iter().copied().fold(0.0, f64::max));
    }
    let t = u.times();
    let integral: f64 = t
        .windows(2)
        .zip(norms.windows(2))
        .map(|(tw, nw)| 0.5 * (tw[1] - tw[0]) * (nw[0].powf(r) + nw[1].powf(r)))
        .sum();
    Ok(integral.powf(1.0 / r))
}

/// `max(||f||_{p1}, ||f||_{p2})`.
pub fn intersection_norm(f: &Field, p1: f64, p2: f64) -> Result<f64> {
    Ok(lp_norm(f, p1)?.max(lp_norm(f, p2)?))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// `max(lambda^{1/(n+1)} ||f||_{q_n}, ||f||_{p_n})`, the norm of
/// `L^{q_n} ∩ L^{p_n}` at scale `lambda`.
pub fn xstar_norm(f: &Field, lambda: f64, n: usize) -> Result<f64> {
    check_lambda(lambda)?;
    let (q_n, p_n) = critical_exponents(n);
    let w = lambda.powf(1.0 / (n as f64 + 1.0));
    Ok((w * lp_norm(f, q_n.to_f64())?).max(lp_norm(f, p_n.to_f64())?))
}

/// Upper bound for `inf { lambda^{-1/(n+1)} ||g||_{q_n'} + ||h||_{p_n'} : f = g + h }`
/// over level-set splittings `g = f 1_{|f| > tau}`, `h = f 1_{|f| <= tau}`.
///
/// The thresholds are the union, over `l = 1..=levels`, of `l` log-spaced
/// values across the range of `|f|`, plus the two extreme splittings. Nesting
/// the grids makes the result non-increasing in `levels`.
pub fn x_norm_upper(f: &Field, lambda: f64, n: usize, levels: usize) -> Result<f64> {
    check_lambda(lambda)?;
    f.expect_rep(Rep::Spatial)?;
    let (q_n, p_n) = critical_exponents(n);
    let s = q_n.dual().to_f64();
    let t = p_n.dual().to_f64();
    let w = lambda.powf(-1.0 / (n as f64 + 1.0));
    let vol = f.grid().cell_volume();

    let mut a: Vec<f64> = f
        .values()
        .iter()
        .map(|v| v.norm())
        .filter(|&v| v > 0.0)
        .collect();
    if a.is_empty() {
        return Ok(0.0);
    }
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite moduli"));
    let amax = *a.last().expect("nonempty");
    let amin = a[0];
    // Prefix sums of normalised powers: below[i] = sum_{j < i} (a_j/amax)^t.
    let mut below = Vec::with_capacity(a.len() + 1);
    let mut above = Vec::with_capacity(a.len() + 1);
    below.push(0.0);
    above.push(0.0);
    for &v in &a {
        below.push(below.last().copied().unwrap_or(0.0) + (v / amax).powf(t));
        above.push(above.last().copied().unwrap_or(0.0) + (v / amax).powf(s));
    }
    let total_s = above[a.len()];
    // Splitting where entries a[..i] go to h and a[i..] go to g.
    let objective = |i: usize| {
        let g = amax * (vol * (total_s - above[i]).max(0.0)).powf(1.0 / s);
        let h = amax * (vol * below[i]).powf(1.0 / t);
        w * g + h
    };
    let mut best = objective(0).min(objective(a.len()));
    for l in 1..=levels {
        for j in 0..l {
            let tau = if l == 1 {
                (amin * amax).sqrt()
            } else {
                amin * (amax / amin).powf(j as f64 / (l - 1) as f64)
            };
            let i = a.partition_point(|&v| v <= tau);
            best = best.min(objective(i));
        }
    }
    Ok(best)
}

/// `||V 1_E||_{n/2} + lambda^{-2/(n+1)} ||V 1_{E^c}||_{(n+1)/2}` with
/// `E = { |V| > lambda ||V||_{n/2} }`.
///
/// Defined for n >= 3. A zero potential returns 0.
pub fn v_lambda_norm(v: &Field, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    v.expect_rep(Rep::Spatial)?;
    let n = v.grid().dim();
    if n < 3 {
        return Err(Error::param("the ||V||_lambda functional needs n >= 3"));
    }
    let crit = n as f64 / 2.0;
    let upper = (n as f64 + 1.0) / 2.0;
    let base = lp_norm(v, crit)?;
    if base == 0.0 {
        return Ok(0.0);
    }
    let level = lambda * base;
    let vol = v.grid().cell_volume();
    let moduli = v.values().iter().map(|z| z.norm());
    let inside = lp_of_moduli(
        moduli.clone().map(|a| if a > level { a } else { 0.0 }),
        vol,
        crit,
    );
    let outside = lp_of_moduli(moduli.map(|a| if a > level { 0.0 } else { a }), vol, upper);
    Ok(inside + lambda.powf(-2.0 / (n as f64 + 1.0)) * outside)
}

/// `|int V u w|`, the left side of the Hölder chains.
pub fn triple_integral(v: &Field, u: &Field, w: &Field) -> Result<Complex64> {
    v.mul(u)?.mul(w)?.integral()
}

/// One row of a norm report, `quantity,n,q,p,r,lambda,value`.
#[derive(Clone, Debug)]
pub struct NormRow {
    pub quantity: String,
    pub table: ExponentTable,
    pub lambda: Option<f64>,
    pub value: f64,
}

impl NormRow {
    pub const HEADER: &'static str = "quantity,n,q,p,r,lambda,value";

    pub fn csv(&self) -> String {
        let lambda = self.lambda.map(|l| format!("{l:.16e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.16e}",
            self.quantity,
            self.table.n,
            self.table.q,
            self.table.p,
            self.table.r,
            lambda,
            self.value
        )
    }
}
