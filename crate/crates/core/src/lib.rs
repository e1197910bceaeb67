//! Numerical core for linear-quadratic potential mean-field games with a
//! finite population of `N` players: grids, integrators and statistics,
//! the catalogue of potential pairs, deterministic optimal control of the
//! mean and the stochastic decoupling-field solver.

mod error;
pub mod control;
pub mod meanfield;
pub mod numerics;
pub mod potentials;

pub use error::{Error, Result};
