//! Numerical laboratory for the hyperbolic structure of 2D Euler and perturbed
//! nonlinear Schrödinger systems.
//!
//! The crate is organized by subsystem:
//!
//! * [`fourier`]: wavevector lattice, the Galerkin-truncated 2D Euler vector
//!   field and periodic-grid spectral calculus (2D and 3D).
//! * [`spectra`]: linearized Euler class operators, truncated spectra and
//!   continued-fraction eigenvalue refinement.
//! * [`dashed_line`]: the dashed-line model and its closed-form heteroclinic
//!   orbits.
//! * [`nls`]: the perturbed discrete NLS lattice, saddle formulas, Silnikov
//!   diagnostics and center/wing symbolic encoding.
//! * [`lax`]: Lax pair operators for 2D/3D Euler and Rossby waves and the
//!   Darboux transformation.
//! * [`shadowing`]: pseudo-orbits, Palmer assembly, shadow solving and symbol
//!   sequences.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dashed_line;
pub mod error;
pub mod fourier;
pub mod lax;
pub mod linalg;
pub mod nls;
pub mod ode;
pub mod shadowing;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;
