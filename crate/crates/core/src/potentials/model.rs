use std::sync::Arc;

use super::Potential;
use crate::numerics::{Matrix, Vector};
use crate::{Error, Result};

/// Which running cost the representative player pays besides `½|α|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunningCost {
    /// `½ |X + ∇f(m)|²`; the control problem of the mean pays `½|m|² + f(m)`.
    Tracking,
    /// Control effort only. `f` must be zero; optimal controls of the
    /// deterministic problem are then constant in time when `b = 0`.
    ControlOnly,
}

/// Law of an individual initial state `ξ` around the mean `ν0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw {
    /// `ξ = ν0` almost surely.
    Dirac,
    /// `ν0 + std · Z` per axis with `Z` standard normal truncated at `cutoff`.
    Gaussian { std: f64, cutoff: f64 },
}

impl Default for InitialLaw {
    fn default() -> Self {
        InitialLaw::Gaussian { std: 1.0, cutoff: 6.0 }
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub drift: Matrix,
    pub sigma: f64,
    pub horizon: f64,
    pub running: RunningCost,
    pub f: Arc<dyn Potential>,
    pub g: Arc<dyn Potential>,
    pub nu0: Vector,
    pub initial: InitialLaw,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.nu0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidParameter("model dimension must be positive".into()));
        }
        if self.drift.nrows() != d || self.drift.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.drift.nrows(),
            });
        }
        for p in [&self.f, &self.g] {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.drift.iter().chain(self.nu0.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("drift and nu0 must be finite".into()));
        }
        if self.running == RunningCost::ControlOnly && !self.f.is_zero() {
            return Err(Error::InvalidParameter(
                "control-only running cost requires f = 0".into(),
            ));
        }
        if let InitialLaw::Gaussian { std, cutoff } = self.initial {
            if !(std >= 0.0 && cutoff > 0.0) {
                return Err(Error::InvalidParameter("initial law needs std >= 0, cutoff > 0".into()));
            }
        }
        Ok(())
    }

    /// Weight of `½|m|²` in the running cost of the mean.
    pub fn state_weight(&self) -> f64 {
        match self.running {
            RunningCost::Tracking => 1.0,
            RunningCost::ControlOnly => 0.0,
        }
    }

    pub fn has_zero_drift(&self) -> bool {
        self.drift.iter().all(|v| *v == 0.0)
    }

    /// Stochastic solves need `σ > 0`.
    pub fn require_noise(&self) -> Result<()> {
        if self.sigma > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("sigma must be > 0 for stochastic solves".into()))
        }
    }

    pub fn with_nu0(mut self, nu0: Vector) -> Self {
        self.nu0 = nu0;
        self
    }

    /// Both potentials even (the symmetric-selection hypothesis).
    pub fn is_even(&self) -> bool {
        self.f.is_even() && self.g.is_even()
    }

    /// Rough a-priori size of optimal adjoints and states started from
    /// `|ν0| ≤ radius`: `|ν0| + T (sup|∇g| + sup|∇f| + 1)`, inflated by
    /// `e^{|b| T}`. Unbounded gradients are measured on a ball that covers
    /// the uncontrolled motion.
    pub fn a_priori_bound(&self, radius: f64) -> f64 {
        let t = self.horizon;
        let growth = (self.drift.norm() * t).exp();
        let ball = (radius + t) * growth;
        let gf = self.f.gradient_bound_on(ball);
        let gg = self.g.gradient_bound_on(ball);
        let hess = self.g.bounds().hess_sup.unwrap_or(0.0);
        (radius * (1.0 + hess) + t * (gg + gf + 1.0)) * growth
    }

    /// Default half-width of the truncated computational domain:
    /// twice the a-priori trajectory bound.
    pub fn default_half_width(&self) -> f64 {
        2.0 * self.a_priori_bound(self.nu0.norm())
    }
}
