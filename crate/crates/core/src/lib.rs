//! Spectral simulation and reconstruction for the inverse problem of
//! recovering a Schrödinger potential from its initial-to-final-state map.
//!
//! The crate works on a periodic box surrogate of R^n (n = 2, 3):
//!
//! - [`grid`]: box, dual lattice, normalised FFT, lattice plane waves.
//! - [`norms`]: exponent arithmetic and the L^p, mixed, X_λ / X_λ* functionals.
//! - [`resolvent`]: the Helmholtz solution operator with limiting absorption,
//!   Littlewood–Paley projections and the resolvent estimate ratios.
//! - [`stationary`]: Neumann-series stationary scattering states.
//! - [`propagator`]: Strang split-step evolution and the maps `U_T`.
//! - [`orthogonality`]: the integration-by-parts and orthogonality identities.
//! - [`reconstruct`]: recovery of `(V1 - V2)^` from stationary states or data.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfld;
pub mod error;
pub mod fit;
pub mod grid;
pub mod norms;
pub mod orthogonality;
pub mod profiles;
pub mod propagator;
pub mod reconstruct;
pub mod resolvent;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{
    fourier, inverse_fourier, plane_wave, plane_wave_at, Field, Grid, LatticeVector, Rep,
};
pub use norms::{exponents, Exponent, ExponentTable, Trajectory};
pub use orthogonality::{alessandrini_pair, cancellation_decomposition, stationary_orthogonality};
pub use propagator::{evolve, final_value_solve, initial_to_final, stationary_trajectory, Stepper};
pub use reconstruct::{
    fhat_direct, fhat_from_data, recover_potential, scattering_ladder, scattering_vectors,
    EvolutionMap, FreeMap, PropagatorMap, ReconstructionReport, ScatteringConfig,
};
pub use resolvent::{apply_resolvent, EpsilonRule, ResolventConfig};
pub use stationary::{
    build_stationary_state, neumann_invert, Mode, NeumannReport, NormKind, Potential,
    StationaryOptions, StationaryState,
};

pub use num_complex::Complex64;
