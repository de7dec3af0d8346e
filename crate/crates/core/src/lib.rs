//! Structure-preserving integrators for Maxwell's equations in an
//! inhomogeneous, isotropic, lossless medium.
//!
//! The crate is organised around the multisymplectic (Bridges) form of the
//! equations:
//!
//! * [`em_core`]: fields, grids, media, the curl algebra and exact solutions.
//! * [`hamilton`]: the `M Z_t + K Z_x = grad S(Z)` structure, Lagrangians,
//!   Legendre momenta and the presymplectic two-forms.
//! * [`adjoint_lab`]: discrete operator matrices on periodic space-time grids
//!   and the Vainberg self-adjointness test.
//! * [`schemes`]: the six-field box scheme, the eliminated nine-point
//!   integrator, the two-field midpoint scheme and the banded solver.
//! * [`conservation`]: discrete multisymplectic conservation residuals and
//!   energy diagnostics.
//! * [`cli`]: configuration, experiment drivers and CSV output.

pub mod adjoint_lab;
pub mod cli;
pub mod conservation;
pub mod em_core;
pub mod error;
pub mod hamilton;
pub mod schemes;
pub mod sparse;

pub use error::{Error, Result};
