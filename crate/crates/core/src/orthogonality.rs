//! The integration-by-parts identity
//! `i ∫ (U1_T - U2_T) f conj(g) = ∫_0^T ∫ (V1 - V2) u1 conj(v2)`
//! and the orthogonality of stationary states against `V1 - V2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Rep};
use crate::propagator::Stepper;
use crate::stationary::{Potential, StationaryState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlessandriniReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs| / (|lhs| + |rhs| + tiny)`.
    pub gap: f64,
}

fn relative_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (a.norm() + b.norm() + f64::MIN_POSITIVE)
}

/// Evaluate both sides of the identity with `u1 = U1_t f` and `v2` the
/// final-value solution for `conj(V2)` with `v2(T) = g`.
///
/// Frames are streamed rather than stored: `conj(v2(t)) = u(T - t)` where `u`
/// evolves `conj(g)` under `V2`, so `u(T)` is computed first and then walked
/// back with the exact inverse step. The time integral is the trapezoid rule
/// over every step.
pub fn alessandrini_pair(
    v1: &Potential,
    v2: &Potential,
    f: &Field,
    g: &Field,
    t: f64,
    steps: usize,
) -> Result<AlessandriniReport> {
    for field in [v2.field(), f, g] {
        v1.field().expect_same_grid(field)?;
        field.expect_rep(Rep::Spatial)?;
    }
    if !(t > 0.0) || steps == 0 {
        return Err(Error::param("need T > 0 and at least one step"));
    }
    let tau = t / steps as f64;
    let s1 = Stepper::new(v1.field(), tau)?;
    let s2 = Stepper::new(v2.field(), tau)?;
    let run = |s: &Stepper, start: Field| {
        let mut u = start;
        for _ in 0..steps {
            s.step(&mut u);
        }
        u
    };
    let (u2_final, mut back) = rayon::join(|| run(&s2, f.clone()), || run(&s2, g.conj()));
    let diff = v1.field().sub(v2.field())?;
    let vol = f.grid().cell_volume();
    // Sequential on purpose: a parallel reduction would make the sum depend
    // on scheduling and break bit-for-bit reproducibility.
    let pairing = |u: &Field, w: &Field| -> Complex64 {
        diff.values()
            .iter()
            .zip(u.values())
            .zip(w.values())
            .map(|((d, a), b)| d * a * b)
            .sum::<Complex64>()
            * vol
    };
    let mut u1 = f.clone();
    let mut rhs = Complex64::default();
    for j in 0..=steps {
        let weight = if j == 0 || j == steps { 0.5 * tau } else { tau };
        rhs += pairing(&u1, &back) * weight;
        if j < steps {
            s1.step(&mut u1);
            s2.unstep(&mut back);
        }
    }
    let lhs = Complex64::i() * u1.sub(&u2_final)?.inner(g)?;
    Ok(AlessandriniReport {
        lhs,
        rhs,
        gap: relative_gap(lhs, rhs),
    })
}

fn check_pair(
    v1: &Potential,
    v2: &Potential,
    s1: &StationaryState,
    s2: &StationaryState,
) -> Result<()> {
    v1.field().expect_same_grid(v2.field())?;
    v1.field().expect_same_grid(&s1.w0)?;
    v1.field().expect_same_grid(&s2.w0)?;
    if (s1.lambda - s2.lambda).abs() > 1e-12 * s1.lambda.max(s2.lambda) {
        return Err(Error::param(format!(
            "stationary states have different energies ({} vs {})",
            s1.lambda, s2.lambda
        )));
    }
    Ok(())
}

/// `∫_0^T ∫ (V1 - V2) psi1 conj(psi2)`; the common phase `e^{-i lambda^2 t}`
/// cancels, leaving `T ∫ (V1 - V2) w1 conj(w2)`.
///
/// `s2` must have been built for `conj(V2)`.
pub fn stationary_orthogonality(
    v1: &Potential,
    v2: &Potential,
    s1: &StationaryState,
    s2: &StationaryState,
    t: f64,
) -> Result<Complex64> {
    check_pair(v1, v2, s1, s2)?;
    let diff = v1.difference(v2)?;
    Ok(diff.mul(&s1.total())?.inner(&s2.total())? * t)
}

/// The four pieces of `∫ F w1 conj(w2)`, `F = V1 - V2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cancellation {
    /// `∫ F w1^0 conj(w2^0)`.
    pub leading: Complex64,
    /// `∫ F w1^0 conj(w2^cor)`.
    pub r1: Complex64,
    /// `∫ F w1^cor conj(w2^0)`.
    pub r2: Complex64,
    /// `∫ F w1^cor conj(w2^cor)`.
    pub r3: Complex64,
}

impl Cancellation {
    pub fn remainder(&self) -> Complex64 {
        self.r1 + self.r2 + self.r3
    }

    pub fn total(&self) -> Complex64 {
        self.leading + self.remainder()
    }
}

pub fn cancellation_decomposition(
    v1: &Potential,
    v2: &Potential,
    s1: &StationaryState,
    s2: &StationaryState,
) -> Result<Cancellation> {
    check_pair(v1, v2, s1, s2)?;
    let diff = v1.difference(v2)?;
    let a0 = diff.mul(&s1.w0)?;
    let a1 = diff.mul(&s1.wcor)?;
    Ok(Cancellation {
        leading: a0.inner(&s2.w0)?,
        r1: a0.inner(&s2.wcor)?,
        r2: a1.inner(&s2.w0)?,
        r3: a1.inner(&s2.wcor)?,
    })
}
