//! Numerical laboratory for a flocculation chemostat model.
//!
//! One substrate `S` feeds `m` bacterial species, each split into an isolated
//! (planktonic) population `u_i` and an attached (floc) population `v_i`. All
//! fields live on the unit interval with advection towards `x = 1`, a Robin
//! inflow condition at `x = 0` and a no-flux outflow condition at `x = 1`.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameters, kinetic descriptor families, the reaction field and
//!   sampled certification of the structural conditions (quasi-positivity,
//!   mass dissipation, growth bounds).
//! - [`eigen`]: principal eigenpairs of the advection-diffusion operator for
//!   the inflow and outflow Robin variants.
//! - [`pde`]: IMEX transient solver with blow-up detection and runtime monitors.
//! - [`steady`]: Green's-kernel fixed-point operators, cone construction and
//!   hypothesis checkers for nontrivial steady states.
//! - [`diagnostics`]: reproductive numbers, the blow-up functional, the
//!   `L^p` energy and weighted mass.
//! - [`config`] and [`experiment`]: configuration files, presets, experiment
//!   runs, sweeps and CSV output used by the `flocsim` binary.

pub mod config;
pub mod diagnostics;
pub mod eigen;
mod error;
pub mod experiment;
pub mod grid;
pub mod model;
pub mod operator;
pub mod pde;
pub mod steady;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::Grid;
pub use model::{FlocRate, GrowthRate, KineticsSpec, ModelParams};
