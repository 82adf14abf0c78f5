//! Stationary scattering states `w = w0 + wcor` with `w0 = e^{-i lambda omega.x}`
//! and `wcor = (Id - P_lambda V)^{-1} P_lambda (V w0)`, built by Neumann series.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{loglog_slope, SlopeFit};
use crate::grid::{plane_wave, Field, Grid, LatticeVector, Rep};
use crate::norms::{exponents, lp_norm, v_lambda_norm, xstar_norm, ExponentTable, Rational};
use crate::resolvent::{apply_resolvent, helmholtz_operator, EpsilonRule, ResolventConfig};

/// Norms of a potential that the estimates refer to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialNorms {
    pub l1: f64,
    pub lq: f64,
    /// `L^{p'}` with `p` the solution exponent of the table.
    pub lp_dual: f64,
    /// `L^{n/2}`.
    pub l_half_n: f64,
    /// `L^{(n+1)/2}`.
    pub l_half_n1: f64,
}

impl PotentialNorms {
    fn compute(f: &Field, table: &ExponentTable) -> Result<Self> {
        let n = f.grid().dim() as f64;
        Ok(PotentialNorms {
            l1: lp_norm(f, 1.0)?,
            lq: lp_norm(f, table.q.to_f64())?,
            lp_dual: lp_norm(f, table.p.dual().to_f64())?,
            l_half_n: lp_norm(f, (n / 2.0).max(1.0))?,
            l_half_n1: lp_norm(f, (n + 1.0) / 2.0)?,
        })
    }
}

/// A potential sampled on the grid, with its exponent table and cached norms.
#[derive(Clone, Debug)]
pub struct Potential {
    field: Field,
    table: ExponentTable,
    norms: PotentialNorms,
}

impl Potential {
    /// Wrap a spatial field. Samples outside the central half box must be
    /// below `1e-12 * max(1, max|V|)`.
    pub fn new(field: Field, q: Rational) -> Result<Self> {
        field.expect_rep(Rep::Spatial)?;
        let grid = field.grid().clone();
        let table = exponents(grid.dim(), q)?;
        let floor = 1e-12 * field.max_abs().max(1.0);
        let leak = (0..grid.len())
            .filter(|&i| !grid.in_central_half(i))
            .map(|i| field.values()[i].norm())
            .fold(0.0, f64::max);
        if leak > floor {
            return Err(Error::param(format!(
                "potential reaches {leak:.3e} outside the central half box (allowed {floor:.1e})"
            )));
        }
        let norms = PotentialNorms::compute(&field, &table)?;
        Ok(Potential {
            field,
            table,
            norms,
        })
    }

    pub fn zero(grid: &Grid, q: Rational) -> Result<Self> {
        Potential::new(Field::zeros(grid, Rep::Spatial), q)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn table(&self) -> &ExponentTable {
        &self.table
    }

    pub fn norms(&self) -> &PotentialNorms {
        &self.norms
    }

    pub fn is_real(&self) -> bool {
        self.field.values().iter().all(|v| v.im == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.field
            .values()
            .iter()
            .all(|v| *v == Complex64::default())
    }

    pub fn conj(&self) -> Potential {
        Potential {
            field: self.field.conj(),
            table: self.table.clone(),
            norms: self.norms,
        }
    }

    pub fn scale(&self, c: f64) -> Potential {
        let field = self.field.scale(Complex64::new(c, 0.0));
        let norms = PotentialNorms::compute(&field, &self.table).expect("spatial field");
        Potential {
            field,
            table: self.table.clone(),
            norms,
        }
    }

    /// `V1 - V2` with the exponent table of `self`.
    pub fn difference(&self, other: &Potential) -> Result<Field> {
        self.field.sub(&other.field)
    }

    pub fn v_lambda_norm(&self, lambda: f64) -> Result<f64> {
        v_lambda_norm(&self.field, lambda)
    }
}

/// The norm in which the Neumann series is measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Lp(f64),
    /// `xstar_norm` at the resolvent's `lambda`.
    Xstar,
}

impl NormKind {
    pub fn measure(&self, f: &Field, lambda: f64) -> Result<f64> {
        match *self {
            NormKind::Lp(p) => lp_norm(f, p),
            NormKind::Xstar => xstar_norm(f, lambda, f.grid().dim()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeumannReport {
    /// Number of applications of `P_lambda V`.
    pub iterations: usize,
    /// Largest ratio of successive term norms over the last three terms.
    pub contraction_estimate: f64,
    pub converged: bool,
    /// Norm of the first term left out of the returned partial sum.
    pub final_increment: f64,
    pub norm_used: NormKind,
}

/// Ratio above which the series is declared divergent.
const DIVERGENCE: f64 = 1e6;

/// Sum `w = sum_{k<K} (P_lambda V)^k rhs`, stopping at the first `K` whose term
/// has norm below `tol * ||rhs||`. That term is not added, so
/// `w - (rhs + P_lambda(V w))` is exactly minus it and its norm is
/// `final_increment`.
///
/// A series that does not meet the tolerance within `max_iter` applications,
/// or whose terms grow past `1e6 ||rhs||`, is returned with
/// `converged = false` together with the partial sum.
pub fn neumann_invert(
    v: &Potential,
    cfg: &ResolventConfig,
    rhs: &Field,
    norm: NormKind,
    tol: f64,
    max_iter: usize,
) -> Result<(Field, NeumannReport)> {
    if !(tol > 0.0) {
        return Err(Error::param(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if v.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    let rhs = rhs.in_rep(Rep::Spatial);
    rhs.expect_same_grid(v.field())?;
    let lambda = cfg.lambda();
    let rhs_norm = norm.measure(&rhs, lambda)?;
    let mut report = NeumannReport {
        iterations: 0,
        contraction_estimate: 0.0,
        converged: true,
        final_increment: 0.0,
        norm_used: norm,
    };
    if rhs_norm == 0.0 {
        return Ok((Field::zeros(rhs.grid(), Rep::Spatial), report));
    }
    let mut sum = rhs.clone();
    let mut term = rhs;
    let mut prev = rhs_norm;
    let mut ratios = Vec::new();
    report.converged = false;
    for it in 1..=max_iter {
        let next = apply_resolvent(&v.field().mul(&term)?, cfg)?;
        let size = norm.measure(&next, lambda)?;
        ratios.push(size / prev);
        report.iterations = it;
        report.final_increment = size;
        report.contraction_estimate = ratios.iter().rev().take(3).copied().fold(0.0, f64::max);
        if size < tol * rhs_norm {
            report.converged = report.contraction_estimate < 1.0;
            break;
        }
        if !size.is_finite() || size > DIVERGENCE * rhs_norm {
            break;
        }
        sum = sum.add(&next)?;
        term = next;
        prev = size;
    }
    Ok((sum, report))
}

/// Critical (`X_lambda*`) or non-critical (`L^p`) construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Nonendpoint,
    Endpoint,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonendpoint" => Ok(Mode::Nonendpoint),
            "endpoint" => Ok(Mode::Endpoint),
            other => Err(Error::param(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    pub mode: Mode,
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: EpsilonRule,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            mode: Mode::Nonendpoint,
            tol: 1e-10,
            max_iter: 200,
            epsilon: EpsilonRule::Default,
        }
    }
}

impl StationaryOptions {
    pub fn endpoint() -> Self {
        StationaryOptions {
            mode: Mode::Endpoint,
            ..Default::default()
        }
    }

    fn working_norm(&self, v: &Potential) -> NormKind {
        match self.mode {
            Mode::Nonendpoint => NormKind::Lp(v.table().p.to_f64()),
            Mode::Endpoint => NormKind::Xstar,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StationaryState {
    pub k: LatticeVector,
    pub lambda: f64,
    pub omega: [f64; 3],
    pub epsilon: f64,
    pub w0: Field,
    pub wcor: Field,
    pub neumann: NeumannReport,
    pub residual: f64,
}

impl StationaryState {
    /// `w0 + wcor`.
    pub fn total(&self) -> Field {
        self.w0.add(&self.wcor).expect("same grid")
    }

    pub fn resolvent(&self) -> ResolventConfig {
        ResolventConfig::with_epsilon(self.w0.grid(), self.lambda, self.epsilon)
            .expect("validated at construction")
    }
}

fn check_wavevector(grid: &Grid, k: &LatticeVector) -> Result<()> {
    let half = grid.points() as i64 / 2;
    let inside = k.0[..grid.dim()].iter().all(|c| c.abs() < half)
        && k.0[grid.dim()..].iter().all(|&c| c == 0);
    if k.is_zero() || !inside {
        let dk = grid.freq_step();
        return Err(Error::OffLattice(
            k.0[..grid.dim()].iter().map(|&c| c as f64 * dk).collect(),
        ));
    }
    Ok(())
}

/// Build the state with `lambda omega = (2 pi / L) k`.
pub fn build_stationary_state(
    v: &Potential,
    k: &LatticeVector,
    opts: &StationaryOptions,
) -> Result<StationaryState> {
    let grid = v.grid().clone();
    check_wavevector(&grid, k)?;
    let table = v.table();
    match opts.mode {
        Mode::Endpoint if grid.dim() < 3 || !table.is_endpoint() => {
            return Err(Error::param("endpoint mode needs n >= 3 and q = n/2"));
        }
        Mode::Nonendpoint if table.is_endpoint() => {
            return Err(Error::param("non-endpoint mode needs q > n/2"));
        }
        _ => {}
    }
    let dk = grid.freq_step();
    let lambda = k.norm() * dk;
    let mut omega = [0.0; 3];
    for (o, &c) in omega.iter_mut().zip(k.0.iter()) {
        *o = c as f64 * dk / lambda;
    }
    let cfg = ResolventConfig::with_rule(&grid, lambda, opts.epsilon)?;
    let w0 = plane_wave(&grid, k);
    let source = apply_resolvent(&v.field().mul(&w0)?, &cfg)?;
    let (wcor, neumann) = neumann_invert(
        v,
        &cfg,
        &source,
        opts.working_norm(v),
        opts.tol,
        opts.max_iter,
    )?;
    if !neumann.converged {
        return Err(Error::NonConvergence(neumann));
    }
    let mut state = StationaryState {
        k: *k,
        lambda,
        omega,
        epsilon: cfg.epsilon(),
        w0,
        wcor,
        neumann,
        residual: 0.0,
    };
    state.residual = helmholtz_residual(&state, v, &cfg)?;
    Ok(state)
}

/// `||(Δ + lambda^2 + i eps lambda - V) w - i eps lambda w0||_2 / ||V w0||_2`.
///
/// The absorption makes `i eps lambda w0` the exact right-hand side for the
/// regularised problem. For `V = 0` the denominator is replaced by `||w0||_2`.
///
/// The norm is taken off the Nyquist shell. The resolvent never acts there,
/// so the discrete equation only lives on the remaining modes; including the
/// shell would just report the Nyquist content of `V w`.
pub fn helmholtz_residual(
    s: &StationaryState,
    v: &Potential,
    cfg: &ResolventConfig,
) -> Result<f64> {
    let w = s.total();
    let lambda = cfg.lambda();
    let eps = cfg.epsilon();
    let lhs = helmholtz_operator(&w, lambda, eps).sub(&v.field().mul(&w)?)?;
    let target = s.w0.scale(Complex64::new(0.0, eps * lambda));
    let r = lhs.sub(&target)?.without_nyquist().l2();
    let vw0 = v.field().mul(&s.w0)?.l2();
    let denom = if vw0 > 0.0 { vw0 } else { s.w0.l2() };
    Ok(r / denom)
}

/// `||w - (w0 + P_lambda(V w))|| / ||P_lambda(V w0)||` in the given norm.
pub fn fixed_point_defect(s: &StationaryState, v: &Potential, norm: NormKind) -> Result<f64> {
    let cfg = s.resolvent();
    let w = s.total();
    let image = s.w0.add(&apply_resolvent(&v.field().mul(&w)?, &cfg)?)?;
    let source = apply_resolvent(&v.field().mul(&s.w0)?, &cfg)?;
    let scale = norm.measure(&source, s.lambda)?;
    let defect = norm.measure(&w.sub(&image)?, s.lambda)?;
    Ok(if scale > 0.0 { defect / scale } else { defect })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub k: LatticeVector,
    pub lambda: f64,
    pub omega: [f64; 3],
    pub iterations: usize,
    pub contraction: f64,
    pub residual: f64,
    /// `||wcor||_{L^p}` (non-endpoint) or `xstar_norm(wcor)` (endpoint).
    pub norm_value: f64,
    /// `||V||_lambda` when n >= 3.
    pub v_lambda: Option<f64>,
}

impl DecayRow {
    pub fn csv_header(dim: usize) -> String {
        let omega: Vec<String> = (0..dim).map(|i| format!("omega{i}")).collect();
        format!(
            "lambda,{},iters,contraction,residual,norm_value",
            omega.join(",")
        )
    }

    pub fn csv(&self, dim: usize) -> String {
        let omega: Vec<String> = self.omega[..dim]
            .iter()
            .map(|o| format!("{o:.16e}"))
            .collect();
        format!(
            "{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
            self.lambda,
            omega.join(","),
            self.iterations,
            self.contraction,
            self.residual,
            self.norm_value
        )
    }
}

#[derive(Clone, Debug)]
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    pub fit: SlopeFit,
    /// Index of the first rung that failed to converge, if any. Rows stop
    /// before it.
    pub aborted_at: Option<usize>,
    pub failure: Option<NeumannReport>,
}

/// Build states along a ladder of lattice vectors (in parallel) and fit the
/// decay of the correction norm against `lambda`.
pub fn decay_study(
    v: &Potential,
    ladder: &[LatticeVector],
    opts: &StationaryOptions,
) -> Result<DecayStudy> {
    let n = v.grid().dim();
    let results: Vec<Result<DecayRow>> = ladder
        .par_iter()
        .map(|k| {
            let s = build_stationary_state(v, k, opts)?;
            let norm_value = match opts.mode {
                Mode::Nonendpoint => lp_norm(&s.wcor, v.table().p.to_f64())?,
                Mode::Endpoint => xstar_norm(&s.wcor, s.lambda, n)?,
            };
            let v_lambda = if n >= 3 {
                Some(v.v_lambda_norm(s.lambda)?)
            } else {
                None
            };
            Ok(DecayRow {
                k: *k,
                lambda: s.lambda,
                omega: s.omega,
                iterations: s.neumann.iterations,
                contraction: s.neumann.contraction_estimate,
                residual: s.residual,
                norm_value,
                v_lambda,
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut aborted_at = None;
    let mut failure = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(Error::NonConvergence(rep)) => {
                aborted_at = Some(i);
                failure = Some(rep);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm_value).collect();
    Ok(DecayStudy {
        fit: loglog_slope(&xs, &ys),
        rows,
        aborted_at,
        failure,
    })
}
