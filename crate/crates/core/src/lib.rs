//! Numerical laboratory for the semiclassical limit of the defocusing
//! nonlinear Klein-Gordon equation on a periodic torus, and the relativistic
//! Euler system with potential pressure that arises in that limit.

// NaN must fail comparisons, and index loops over parallel fields read better.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod corpus;
pub mod error;
pub mod euler;
pub mod fit;
pub mod grid;
pub mod kg;
pub mod modulated;
pub mod potential;
pub mod rep;
pub mod runner;
pub mod verify;
pub mod wkb;

pub use error::{LabError, Result};
pub use num_complex;
pub use grid::{ComplexField, CovectorField, Grid, ScalarField, SymTensorField};
pub use kg::{KgDiagnostics, KgSolver, KgState, SplitResiduals};
pub use potential::Potential;
pub use rep::{FluidData, FluidDiagnostics, FluidState, RepSolver};

/// Density below which a point counts as vacuum in quotients by `rho`.
pub const RHO_FLOOR: f64 = 1e-12;
