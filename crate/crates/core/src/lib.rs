//! Exact wavefunctions for the time-dependent harmonic oscillator built from
//! the Madelung-Bohm decomposition `ψ = A e^{iS}`, with a quadratic phase whose
//! time dependence is driven by a solution of the Ermakov equation
//! `ρ̈ + Ω²(t) ρ = 1/ρ³`.
//!
//! The crate is organised bottom-up:
//!
//! * [`frequency`]: frequency profiles `Ω(t)`, including the rational family `1/(a+bt)`.
//! * [`ermakov`]: closed-form and numerically integrated Ermakov solutions, and `ν = ln ρ`.
//! * [`madelung`]: amplitude, phase, wavefunction and Bohm potential fields.
//! * [`verify`]: finite-difference residuals of the governing equations.
//! * [`tdse`]: a split-step Fourier propagator used as an independent oracle.
//! * [`commands`]: the figure/CSV/report generators behind the `tdho` binary.
//!
//! Units are ħ = 1 and m = 1 throughout.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod ermakov;
pub mod error;
pub mod fd;
pub mod frequency;
pub mod grid;
pub mod madelung;
pub mod manifest;
pub mod ode;
pub mod output;
pub mod tdse;
pub mod verify;

pub use ermakov::{ErmakovSolution, LogScale, SolverTolerances};
pub use error::{Error, Result};
pub use fd::Stencil;
pub use frequency::{FrequencyProfile, RationalFrequency, Regime};
pub use grid::{SpatialGrid, WavefunctionGrid, WavefunctionSlice};
pub use madelung::{Branch, ExactSolution, PhaseField};
pub use tdse::{fidelity, PropagatorConfig, SplitStepPropagator};
pub use verify::ResidualReport;
