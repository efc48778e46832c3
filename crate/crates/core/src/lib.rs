//! Pseudo-spectral laboratory for the inhomogeneous nonlinear Schrödinger
//! equation i u_t + Δu = |x|^{−b}|u|^{q−1}u and the inhomogeneous
//! generalized Hartree equation
//! i w_t + Δw = |w|^{q−2}(J_α∗|·|^{−b}|w|^q)|x|^{−b}w on periodic boxes.
//!
//! * [`regime`]: exact-rational parameter classification.
//! * [`lattice`]: grids, fields, the transform pair, weight tables.
//! * [`operators`]: free flow, nonlinearities, Riesz oracles, estimate ratios.
//! * [`integrator`]: Strang splitting and the Duhamel residual.
//! * [`conformal`]: pseudoconformal transform and scattering estimates.
//! * [`diagnostics`]: conserved quantities, virial identity, Υ, decay fits.

// NaN must fail validation, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod diagnostics;
mod error;
pub mod exec;
mod fft;
pub mod integrator;
pub mod lattice;
pub mod operators;
pub mod regime;

pub use error::{Error, Result};
pub use num_complex::Complex64;
