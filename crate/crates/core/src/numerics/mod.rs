//! Dense linear algebra aliases, grids, one-step ODE integration, backward
//! Riccati solvers, seeded Gaussian streams and the sample statistics used
//! by the selection experiments.

mod grid;
mod ode;
mod riccati;
mod rng;
pub mod stats;

pub use grid::{Axis, SpaceGrid, TimeGrid};
pub use ode::{integrate_ode, Direction, Trajectory};
pub use riccati::{delarue_riccati, riccati_backward, DelarueCurves};
pub use rng::{gaussian_increments, GaussianSource, RngStream};

/// Column vector in ℝ^d.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Steps per unit time used when a caller does not pick a resolution.
pub const DEFAULT_STEPS_PER_UNIT: usize = 1000;

pub(crate) fn check_finite_matrix(name: &str, m: &Matrix) -> crate::Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(crate::Error::InvalidInput(format!("{name} is empty")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::InvalidInput(format!(
            "{name} has non-finite entries"
        )));
    }
    Ok(())
}

/// `(a + aᵀ) / 2`
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}
