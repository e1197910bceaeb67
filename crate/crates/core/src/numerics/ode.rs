use super::{TimeGrid, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `x0` is the state at `t0`.
    Forward,
    /// `x0` is the state at `T`; integrate down to `t0`.
    Backward,
}

/// States sampled at every node of a [`TimeGrid`], in increasing time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vector>,
}

impl Trajectory {
    pub fn first(&self) -> &Vector {
        &self.states[0]
    }

    pub fn last(&self) -> &Vector {
        &self.states[self.states.len() - 1]
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Piecewise-linear evaluation.
    pub fn at(&self, t: f64) -> Vector {
        let (k, w) = self.grid.locate(t);
        &self.states[k] * (1.0 - w) + &self.states[k + 1] * w
    }
}

/// Classical fourth-order Runge–Kutta on a uniform grid.
pub fn integrate_ode<F>(rhs: F, x0: &Vector, grid: &TimeGrid, direction: Direction) -> Result<Trajectory>
where
    F: Fn(f64, &Vector) -> Vector,
{
    let n = grid.nodes();
    let mut states = vec![Vector::zeros(0); n];
    let (start, h) = match direction {
        Direction::Forward => (0, grid.dt()),
        Direction::Backward => (n - 1, -grid.dt()),
    };
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationDiverged { t: grid.time(start) });
    }
    states[start] = x0.clone();
    let mut x = x0.clone();
    for step in 0..grid.steps() {
        let (k_from, k_to) = match direction {
            Direction::Forward => (step, step + 1),
            Direction::Backward => (n - 1 - step, n - 2 - step),
        };
        let t = grid.time(k_from);
        x = rk4_step(&rhs, t, &x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { t: grid.time(k_to) });
        }
        states[k_to] = x.clone();
    }
    Ok(Trajectory { grid: *grid, states })
}

pub(crate) fn rk4_step<F>(rhs: &F, t: f64, x: &Vector, h: f64) -> Vector
where
    F: Fn(f64, &Vector) -> Vector,
{
    let k1 = rhs(t, x);
    let k2 = rhs(t + 0.5 * h, &(x + &k1 * (0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(x + &k2 * (0.5 * h)));
    let k4 = rhs(t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}
