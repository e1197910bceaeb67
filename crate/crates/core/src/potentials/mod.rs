//! Potential pairs `(f, g)`, the model record that carries them, the
//! `1/N` reminder corrections and the catalogue of example families.

mod catalogue;
mod check;
mod costs;
mod delarue;
mod logcosh;
mod model;
mod quadratic;
mod radial;

use std::fmt;

pub use catalogue::{ModelFamily, ModelOptions};
pub use check::{cost_gradient_defect, derivative_defect, DerivativeDefect};
pub use costs::{
    grad_f_n, grad_f_weighted, grad_g_n, grad_g_weighted, reminder, running_cost, terminal_cost,
};
pub use delarue::{make_delarue_terminal, DelarueTerminal};
pub use logcosh::{make_logcosh_terminal, LogCosh};
pub use model::{InitialLaw, ModelSpec, RunningCost};
pub use quadratic::{Quadratic, Zero};
pub use radial::{make_radial_terminal, LogCoshProfile, Radial, RadialProfile};

use crate::numerics::{Matrix, Vector};
use crate::Result;

/// Declared sup-norms and Lipschitz constants of `∇p`, `∇²p` and `∇²p·m`.
/// `None` means unbounded (or not claimed).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bounds {
    pub grad_sup: Option<f64>,
    pub grad_lip: Option<f64>,
    pub hess_sup: Option<f64>,
    pub hess_lip: Option<f64>,
    pub hess_m_sup: Option<f64>,
    pub hess_m_lip: Option<f64>,
}

/// Constant Hessian and linear term of a quadratic potential
/// `½ mᵀ H m + k·m`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub hessian: Matrix,
    pub linear: Vector,
}

pub trait Potential: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn value(&self, m: &Vector) -> f64;

    fn gradient(&self, m: &Vector) -> Vector;

    /// Fails only for potentials with genuine kinks (unmollified couplings).
    fn hessian(&self, m: &Vector) -> Result<Matrix>;

    fn bounds(&self) -> Bounds;

    /// Upper bound of `|∇p|` on the ball of the given radius.
    fn gradient_bound_on(&self, radius: f64) -> f64 {
        let _ = radius;
        self.bounds().grad_sup.unwrap_or(f64::INFINITY)
    }

    fn is_zero(&self) -> bool {
        false
    }

    fn is_even(&self) -> bool;

    fn quadratic_form(&self) -> Option<QuadraticForm> {
        None
    }

    fn radial_profile(&self) -> Option<&dyn RadialProfile> {
        None
    }
}
