use rayon::prelude::*;

use crate::numerics::{RngStream, SpaceGrid, TimeGrid, Vector};
use crate::potentials::{running_cost, terminal_cost, InitialLaw, ModelSpec};
use crate::{Error, Result};

use super::DecouplingField;

/// Control applied to the mean process `dm = (b m + α) dt + s dB`.
#[derive(Debug, Clone)]
pub enum Policy<'a> {
    /// `α = −u(t, m)`
    Feedback(&'a DecouplingField),
    /// `α ≡ c`
    Constant(Vector),
    Zero,
}

/// Randomness of the mean process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Empirical mean of `N` players: `m0 = ν0 + mean of N draws of ξ − ν0`,
    /// noise intensity `σ/√N`, reminders weighted `1/N` in the cost.
    Players(usize),
    /// `m0 = ν0`, noise intensity `ε`, no reminders.
    Common(f64),
    Deterministic,
}

impl NoiseModel {
    fn intensity(&self, spec: &ModelSpec) -> f64 {
        match *self {
            NoiseModel::Players(n) => spec.sigma / (n as f64).sqrt(),
            NoiseModel::Common(eps) => eps,
            NoiseModel::Deterministic => 0.0,
        }
    }

    fn reminder_weight(&self) -> f64 {
        match *self {
            NoiseModel::Players(n) => 1.0 / n as f64,
            _ => 0.0,
        }
    }
}

/// Map applied to every Gaussian draw pair before use. `Rotate90` sends
/// `(z1, z2)` to `(−z2, z1)`, which rotates the whole ensemble when the
/// model is rotation invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseTransform {
    #[default]
    Identity,
    Rotate90,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Path `i` draws from stream `stream_offset + i` of `seed`.
    pub stream_offset: u64,
    /// Record every `record_every`-th step (the final time is always kept).
    pub record_every: usize,
    pub transform: NoiseTransform,
    pub cost: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            paths: 1000,
            steps: 1000,
            seed: 0,
            stream_offset: 0,
            record_every: 10,
            transform: NoiseTransform::Identity,
            cost: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    /// `[record][component]`
    pub m: Vec<f64>,
    /// Decoupling value `η = −α` at the recorded times.
    pub eta: Vec<f64>,
    pub cost: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub dim: usize,
    pub times: Vec<f64>,
    pub paths: Vec<SamplePath>,
}

impl PathEnsemble {
    pub fn terminal(&self, path: usize) -> &[f64] {
        let d = self.dim;
        let m = &self.paths[path].m;
        &m[m.len() - d..]
    }

    pub fn terminals(&self) -> Vec<Vec<f64>> {
        (0..self.paths.len()).map(|p| self.terminal(p).to_vec()).collect()
    }

    pub fn state(&self, path: usize, record: usize) -> &[f64] {
        let d = self.dim;
        &self.paths[path].m[record * d..(record + 1) * d]
    }

    pub fn clamped_fraction(&self) -> f64 {
        let n = self.paths.iter().filter(|p| p.clamped).count();
        n as f64 / self.paths.len().max(1) as f64
    }

    /// Monte Carlo estimate of the expected cost and its standard error.
    pub fn mean_cost(&self) -> (f64, f64) {
        let costs: Vec<f64> = self.paths.iter().map(|p| p.cost).collect();
        let n = costs.len() as f64;
        let mean = costs.iter().sum::<f64>() / n;
        let var = if costs.len() > 1 {
            costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    }

    /// Warning text when more than 1% of paths touched the grid boundary.
    pub fn clamp_warning(&self) -> Option<String> {
        let f = self.clamped_fraction();
        (f > 0.01).then(|| format!("{:.1}% of paths left the computational box and were clamped", 100.0 * f))
    }
}

fn initial_state(spec: &ModelSpec, noise: NoiseModel, draws: &mut Draws) -> Vec<f64> {
    let d = spec.dim();
    let mut m: Vec<f64> = spec.nu0.iter().copied().collect();
    if let (NoiseModel::Players(n), InitialLaw::Gaussian { std, cutoff }) = (noise, spec.initial) {
        let mut sum = vec![0.0; d];
        let mut z = vec![0.0; d];
        for _ in 0..n {
            draws.fill(&mut z, |g| g.truncated(cutoff));
            for (s, v) in sum.iter_mut().zip(&z) {
                *s += std * v;
            }
        }
        for (x, s) in m.iter_mut().zip(sum) {
            *x += s / n as f64;
        }
    }
    m
}

struct Draws {
    src: crate::numerics::GaussianSource,
    transform: NoiseTransform,
}

impl Draws {
    fn fill(&mut self, z: &mut [f64], mut draw: impl FnMut(&mut crate::numerics::GaussianSource) -> f64) {
        for v in z.iter_mut() {
            *v = draw(&mut self.src);
        }
        if self.transform == NoiseTransform::Rotate90 {
            for pair in z.chunks_exact_mut(2) {
                let (a, b) = (pair[0], pair[1]);
                pair[0] = -b;
                pair[1] = a;
            }
        }
    }
}

struct Dynamics<'a> {
    spec: &'a ModelSpec,
    policy: &'a Policy<'a>,
    drift: Vec<f64>,
    zero_drift: bool,
    clamp_box: Option<&'a SpaceGrid>,
}

impl Dynamics<'_> {
    fn control(&self, t: f64, m: &[f64], out: &mut [f64]) {
        match self.policy {
            Policy::Feedback(field) => {
                field.eval(t, m, out);
                for a in out.iter_mut() {
                    *a = -*a;
                }
            }
            Policy::Constant(c) => out.copy_from_slice(c.as_slice()),
            Policy::Zero => out.fill(0.0),
        }
    }

    fn bm(&self, m: &[f64], c: usize) -> f64 {
        if self.zero_drift {
            return 0.0;
        }
        let d = m.len();
        let mut acc = 0.0;
        for (j, mj) in m.iter().enumerate() {
            acc += self.drift[c * d + j] * mj;
        }
        acc
    }

    fn flow_cost(&self, inv_n: f64, m: &[f64], alpha: &[f64]) -> f64 {
        let e: f64 = alpha.iter().map(|a| a * a).sum();
        0.5 * e + running_cost(self.spec, inv_n, &Vector::from_column_slice(m))
    }
}

fn simulate_path(
    dynamics: &Dynamics,
    noise: NoiseModel,
    grid: &TimeGrid,
    opts: &SimulationOptions,
    path: u64,
) -> SamplePath {
    let spec = dynamics.spec;
    let d = spec.dim();
    let mut draws = Draws { src: RngStream::new(opts.seed, opts.stream_offset + path).gaussian(), transform: opts.transform };
    let mut m = initial_state(spec, noise, &mut draws);
    let s = noise.intensity(spec);
    let dt = grid.dt();
    let sq = dt.sqrt();
    let inv_n = noise.reminder_weight();
    let record = opts.record_every.max(1);

    let mut alpha = vec![0.0; d];
    let mut db = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut rec_m = Vec::with_capacity((grid.steps() / record + 2) * d);
    let mut rec_eta = Vec::with_capacity(rec_m.capacity());
    let mut clamped = false;
    if let Some(b) = dynamics.clamp_box {
        clamped |= b.clamp(&mut m);
    }
    let mut cost = 0.0;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        dynamics.control(t, &m, &mut alpha);
        if k % record == 0 {
            rec_m.extend_from_slice(&m);
            rec_eta.extend(alpha.iter().map(|a| -a));
        }
        if opts.cost {
            let w = if k == 0 { 0.5 } else { 1.0 };
            cost += w * dt * dynamics.flow_cost(inv_n, &m, &alpha);
        }
        if s > 0.0 {
            draws.fill(&mut db, |g| g.standard());
        }
        for c in 0..d {
            let noise_term = if s > 0.0 { s * (sq * db[c]) } else { 0.0 };
            next[c] = m[c] + (dt * (dynamics.bm(&m, c) + alpha[c]) + noise_term);
        }
        std::mem::swap(&mut m, &mut next);
        if let Some(b) = dynamics.clamp_box {
            clamped |= b.clamp(&mut m);
        }
    }
    dynamics.control(grid.t1(), &m, &mut alpha);
    rec_m.extend_from_slice(&m);
    rec_eta.extend(alpha.iter().map(|a| -a));
    if opts.cost {
        let mv = Vector::from_column_slice(&m);
        cost += 0.5 * dt * dynamics.flow_cost(inv_n, &m, &alpha) + terminal_cost(spec, inv_n, &mv);
    }
    SamplePath { m: rec_m, eta: rec_eta, cost, clamped }
}

/// Euler-Maruyama ensemble of the mean process under `policy` on
/// `[t0, T]`, one independent stream per path. Per path the stream first
/// supplies the initial draws (player by player, axis innermost), then the
/// increments step by step. Path order, hence the output, does not depend on
/// the thread count.
///
/// The running cost integrates `½|α|² + F_N(m)` by the trapezoid rule;
/// `G_N(m_T)` is added at the end.
pub fn simulate(
    spec: &ModelSpec,
    policy: &Policy,
    noise: NoiseModel,
    t0: f64,
    opts: &SimulationOptions,
) -> Result<PathEnsemble> {
    spec.validate()?;
    let d = spec.dim();
    if opts.paths == 0 || opts.steps == 0 {
        return Err(Error::InvalidParameter("need at least one path and one step".into()));
    }
    match noise {
        NoiseModel::Players(0) => return Err(Error::InvalidParameter("N must be at least 1".into())),
        NoiseModel::Common(e) if !(e > 0.0) => {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {e}")))
        }
        _ => {}
    }
    if opts.transform == NoiseTransform::Rotate90 && d != 2 {
        return Err(Error::InvalidParameter("rotated noise needs d = 2".into()));
    }
    let clamp_box = match policy {
        Policy::Feedback(field) => {
            if field.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: field.dim() });
            }
            if t0 < field.times.t0() - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "field starts at {}, simulation at {t0}",
                    field.times.t0()
                )));
            }
            Some(&field.grid)
        }
        Policy::Constant(c) => {
            if c.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.len() });
            }
            None
        }
        Policy::Zero => None,
    };
    let grid = TimeGrid::new(t0, spec.horizon, opts.steps)?;
    let dynamics = Dynamics {
        spec,
        policy,
        drift: (0..d * d).map(|i| spec.drift[(i / d, i % d)]).collect(),
        zero_drift: spec.has_zero_drift(),
        clamp_box,
    };
    let paths = (0..opts.paths as u64)
        .into_par_iter()
        .map(|p| simulate_path(&dynamics, noise, &grid, opts, p))
        .collect();
    let record = opts.record_every.max(1);
    let mut times: Vec<f64> = (0..opts.steps).step_by(record).map(|k| grid.time(k)).collect();
    times.push(grid.t1());
    Ok(PathEnsemble { dim: d, times, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;
    use crate::potentials::{RunningCost, Zero};
    use std::sync::Arc;

    fn free() -> ModelSpec {
        ModelSpec {
            name: "free".into(),
            drift: Matrix::zeros(1, 1),
            sigma: 1.0,
            horizon: 1.0,
            running: RunningCost::ControlOnly,
            f: Arc::new(Zero::new(1)),
            g: Arc::new(Zero::new(1)),
            nu0: Vector::zeros(1),
            initial: InitialLaw::default(),
        }
    }

    #[test]
    fn deterministic_constant_control() {
        let spec = free();
        let opts = SimulationOptions { paths: 2, steps: 100, record_every: 50, ..Default::default() };
        let e = simulate(&spec, &Policy::Constant(Vector::from_element(1, 0.5)), NoiseModel::Deterministic, 0.0, &opts)
            .unwrap();
        assert_eq!(e.times.len(), 3);
        assert!((e.terminal(0)[0] - 0.5).abs() < 1e-12);
        // ½ · 0.25 running plus ½ · 0.25 terminal
        assert!((e.paths[0].cost - 0.25).abs() < 1e-12);
        assert_eq!(e.paths[0], e.paths[1]);
    }

    #[test]
    fn zero_control_variance_scales_with_n() {
        let spec = ModelSpec { initial: InitialLaw::Dirac, ..free() };
        let opts = SimulationOptions { paths: 4000, steps: 20, record_every: 20, cost: false, ..Default::default() };
        let e = simulate(&spec, &Policy::Zero, NoiseModel::Players(4), 0.0, &opts).unwrap();
        let x: Vec<f64> = e.terminals().into_iter().map(|v| v[0]).collect();
        let var = crate::numerics::stats::variance(&x);
        // Var m_T = σ² T / N = 0.25
        assert!((var - 0.25).abs() < 0.03, "{var}");
    }
}
