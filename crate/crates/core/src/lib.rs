//! Adaptive biasing force (ABF) and projected ABF sampling of two-dimensional
//! free-energy landscapes.
//!
//! The crate contains the physical model (a solvated trimer and small toy
//! systems), an overdamped Langevin sampler with a binned mean-force
//! estimator, the Helmholtz projection of the estimated force onto a
//! gradient, quadrature and dense-algebra reference computations, and the
//! diagnostics used to compare the biasing schemes.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod force_estimator;
pub mod io;
pub mod grid;
pub mod helmholtz;
pub mod langevin;
pub mod linalg;
pub mod oracle;
pub mod potentials;
pub mod reaction_coordinate;
pub mod run;
pub mod simulation;
pub mod system;
pub mod toy;

pub use error::{Error, Result};
pub use field::{QuadratureField, ScalarField, VectorField2, WeightField};
pub use grid::{BinIndex, Grid2};
pub use langevin::BiasMode;
pub use simulation::Simulation;
