use nalgebra::SVD;
use rayon::prelude::*;

use crate::numerics::{TimeGrid, Vector, DEFAULT_STEPS_PER_UNIT};
use crate::potentials::{grad_g_weighted, running_cost, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub steps_per_unit: usize,
    /// Sup-norm of the terminal residual accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Forward-difference step for the Newton Jacobian.
    pub jacobian_step: f64,
    /// Solutions whose initial adjoints are closer than this are merged.
    pub dedup_tolerance: f64,
    /// Relative cost gap under which two solutions tie as minimizers.
    pub cost_tie_tolerance: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            tolerance: 1e-9,
            max_iterations: 50,
            jacobian_step: 1e-6,
            dedup_tolerance: 1e-5,
            cost_tie_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Minimizer,
    /// Solves the Pontryagin system without attaining the minimal cost.
    StationaryOnly,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Minimizer => "minimizer",
            Classification::StationaryOnly => "stationary-only",
        }
    }
}

/// A solution `(m, η)` of the forward-backward Pontryagin system with
/// control `β = −η`.
#[derive(Debug, Clone)]
pub struct OCSolution {
    pub times: Vec<f64>,
    pub m: Vec<Vector>,
    pub eta: Vec<Vector>,
    pub cost: f64,
    pub classification: Classification,
    /// `|η_T − m_T − ∇g(m_T)|∞`
    pub residual: f64,
    pub iterations: usize,
}

impl OCSolution {
    pub fn eta0(&self) -> &Vector {
        &self.eta[0]
    }

    pub fn terminal(&self) -> &Vector {
        &self.m[self.m.len() - 1]
    }

    pub fn control(&self) -> Vec<Vector> {
        self.eta.iter().map(|e| -e).collect()
    }

    /// `max_t |η_t − η_0|∞`
    pub fn adjoint_variation(&self) -> f64 {
        let e0 = self.eta0();
        self.eta.iter().map(|e| (e - e0).amax()).fold(0.0, f64::max)
    }

    /// Linear interpolation of the state at time `t`.
    pub fn state_at(&self, t: f64) -> Vector {
        interpolate(&self.times, &self.m, t)
    }
}

fn interpolate(times: &[f64], xs: &[Vector], t: f64) -> Vector {
    let n = times.len();
    if n == 1 || t <= times[0] {
        return xs[0].clone();
    }
    if t >= times[n - 1] {
        return xs[n - 1].clone();
    }
    let k = times.partition_point(|&s| s <= t) - 1;
    let w = (t - times[k]) / (times[k + 1] - times[k]);
    &xs[k] * (1.0 - w) + &xs[k + 1] * w
}

#[derive(Debug, Clone)]
pub struct StationarySet {
    /// Sorted by cost.
    pub solutions: Vec<OCSolution>,
    pub min_cost: f64,
    /// Number of solutions tying with the minimal cost.
    pub multiplicity: usize,
    pub starts: usize,
    pub failed_starts: usize,
}

impl StationarySet {
    pub fn minimizers(&self) -> impl Iterator<Item = &OCSolution> {
        self.solutions.iter().filter(|s| s.classification == Classification::Minimizer)
    }

    pub fn best(&self) -> &OCSolution {
        &self.solutions[0]
    }

    /// Solution whose initial adjoint is closest to `eta0`.
    pub fn nearest(&self, eta0: &Vector) -> &OCSolution {
        self.solutions
            .iter()
            .min_by(|a, b| {
                let da = (a.eta0() - eta0).norm();
                let db = (b.eta0() - eta0).norm();
                da.total_cmp(&db)
            })
            .expect("stationary sets are never empty")
    }
}

struct Problem<'a> {
    spec: &'a ModelSpec,
    grid: Option<TimeGrid>,
    nu0: &'a Vector,
    d: usize,
    /// Drift, row-major.
    b: Vec<f64>,
    q: f64,
}

/// Scratch buffers for one allocation-free RK4 sweep of the `2d`-state.
struct Scratch {
    x: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }
}

impl<'a> Problem<'a> {
    fn new(spec: &'a ModelSpec, t0: f64, nu0: &'a Vector, opts: &ShootingOptions) -> Result<Self> {
        spec.validate()?;
        if nu0.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: nu0.len(),
            });
        }
        if !(t0 <= spec.horizon) || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t0 = {t0} must not exceed the horizon {}",
                spec.horizon
            )));
        }
        let grid = if t0 < spec.horizon {
            Some(TimeGrid::with_resolution(t0, spec.horizon, opts.steps_per_unit)?)
        } else {
            None
        };
        let d = spec.dim();
        let b = (0..d * d).map(|i| spec.drift[(i / d, i % d)]).collect();
        Ok(Self { spec, grid, nu0, d, b, q: spec.state_weight() })
    }

    /// `ṁ = bm − η`, `η̇ = −(bᵀη + q m + ∇f(m))` on the packed state `(m, η)`.
    fn rhs(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let (m, eta) = x.split_at(d);
        for i in 0..d {
            let mut bm = 0.0;
            let mut bt_eta = 0.0;
            for j in 0..d {
                bm += self.b[i * d + j] * m[j];
                bt_eta += self.b[j * d + i] * eta[j];
            }
            out[i] = bm - eta[i];
            out[d + i] = -(bt_eta + self.q * m[i]);
        }
        if !self.spec.f.is_zero() {
            let grad = self.spec.f.gradient(&Vector::from_column_slice(m));
            for i in 0..d {
                out[d + i] -= grad[i];
            }
        }
    }

    fn step(&self, s: &mut Scratch, h: f64) {
        let n = 2 * self.d;
        let Scratch { x, k, tmp } = s;
        let [k1, k2, k3, k4] = k;
        self.rhs(x, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        self.rhs(tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        self.rhs(tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        self.rhs(tmp, k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// Integrates from `(ν0, η0)`, calling `visit` at every node.
    fn sweep(&self, eta0: &Vector, mut visit: impl FnMut(&[f64])) -> Result<Vec<f64>> {
        let d = self.d;
        let mut s = Scratch::new(2 * d);
        s.x[..d].copy_from_slice(self.nu0.as_slice());
        s.x[d..].copy_from_slice(eta0.as_slice());
        visit(&s.x);
        if let Some(grid) = &self.grid {
            let h = grid.dt();
            for k in 0..grid.steps() {
                self.step(&mut s, h);
                if s.x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::IntegrationDiverged { t: grid.time(k + 1) });
                }
                visit(&s.x);
            }
        }
        Ok(s.x)
    }

    fn integrate(&self, eta0: &Vector) -> Result<(Vec<Vector>, Vec<Vector>)> {
        let d = self.d;
        let (mut m, mut eta) = (Vec::new(), Vec::new());
        self.sweep(eta0, |x| {
            m.push(Vector::from_column_slice(&x[..d]));
            eta.push(Vector::from_column_slice(&x[d..]));
        })?;
        Ok((m, eta))
    }

    fn terminal_residual(&self, m_t: &Vector, eta_t: &Vector) -> Result<Vector> {
        Ok(eta_t - grad_g_weighted(self.spec, 0.0, m_t)?)
    }

    fn residual(&self, eta0: &Vector) -> Result<Vector> {
        let x = self.sweep(eta0, |_| {})?;
        let d = self.d;
        self.terminal_residual(&Vector::from_column_slice(&x[..d]), &Vector::from_column_slice(&x[d..]))
    }

    fn times(&self) -> Vec<f64> {
        match &self.grid {
            None => vec![self.spec.horizon],
            Some(g) => g.times(),
        }
    }

    fn solution(&self, eta0: &Vector, iterations: usize) -> Result<OCSolution> {
        let (m, eta) = self.integrate(eta0)?;
        let residual = self
            .terminal_residual(m.last().unwrap(), eta.last().unwrap())?
            .amax();
        let times = self.times();
        let cost = control_cost(self.spec, &times, &m, &eta);
        Ok(OCSolution {
            times,
            m,
            eta,
            cost,
            classification: Classification::Minimizer,
            residual,
            iterations,
        })
    }
}

/// `∫ (½|η|² + ½q|m|² + f(m)) dt + ½|m_T|² + g(m_T)` by composite Simpson
/// (trapezoid on an odd number of intervals).
fn control_cost(spec: &ModelSpec, times: &[f64], m: &[Vector], eta: &[Vector]) -> f64 {
    let n = times.len();
    let terminal = 0.5 * m[n - 1].norm_squared() + spec.g.value(&m[n - 1]);
    if n == 1 {
        return terminal;
    }
    let l: Vec<f64> = (0..n)
        .map(|k| 0.5 * eta[k].norm_squared() + running_cost(spec, 0.0, &m[k]))
        .collect();
    let h = times[1] - times[0];
    let steps = n - 1;
    let integral = if steps % 2 == 0 {
        let mut s = l[0] + l[steps];
        for (k, v) in l.iter().enumerate().take(steps).skip(1) {
            s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * h / 3.0
    } else {
        h * (0.5 * (l[0] + l[steps]) + l[1..steps].iter().sum::<f64>())
    };
    integral + terminal
}

/// Newton shooting on the initial adjoint: integrates the Pontryagin system
/// forward from `(ν0, η0)` and drives `η_T − m_T − ∇g(m_T)` to zero.
pub fn shoot(
    spec: &ModelSpec,
    t0: f64,
    nu0: &Vector,
    eta0_guess: &Vector,
    opts: &ShootingOptions,
) -> Result<OCSolution> {
    let problem = Problem::new(spec, t0, nu0, opts)?;
    let d = spec.dim();
    if eta0_guess.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: eta0_guess.len() });
    }
    if problem.grid.is_none() {
        let eta0 = grad_g_weighted(spec, 0.0, nu0)?;
        return problem.solution(&eta0, 0);
    }

    let mut eta0 = eta0_guess.clone();
    let mut r = problem.residual(&eta0)?;
    let mut iterations = 0;
    while r.amax() > opts.tolerance {
        if iterations == opts.max_iterations {
            return Err(Error::NoConvergence { iterations, residual: r.amax() });
        }
        iterations += 1;

        let mut jac = crate::numerics::Matrix::zeros(d, d);
        for k in 0..d {
            let h = opts.jacobian_step * eta0[k].abs().max(1.0);
            let mut e = eta0.clone();
            e[k] += h;
            let rk = problem.residual(&e)?;
            jac.set_column(k, &((rk - &r) / h));
        }
        // least squares handles the degenerate directions along continua of
        // solutions (radial data)
        let svd = SVD::new(jac, true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(1e-300);
        let step = svd
            .solve(&(-&r), cutoff)
            .map_err(|e| Error::InvalidInput(format!("Newton solve: {e}")))?;

        let norm = r.norm();
        let mut lambda = 1.0;
        loop {
            let cand = &eta0 + &step * lambda;
            match problem.residual(&cand) {
                Ok(rc) if rc.norm() <= (1.0 - 1e-4 * lambda) * norm => {
                    eta0 = cand;
                    r = rc;
                    break;
                }
                _ => {}
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::NoConvergence { iterations, residual: r.amax() });
            }
        }
    }
    problem.solution(&eta0, iterations)
}

/// Tensor lattice of `points^d` initial adjoints covering `[−width, width]^d`.
pub fn start_lattice(dim: usize, width: f64, points: usize) -> Vec<Vector> {
    let points = points.max(1);
    let coord = |i: usize| {
        if points == 1 {
            0.0
        } else {
            -width + 2.0 * width * i as f64 / (points - 1) as f64
        }
    };
    let total = points.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut v = Vector::zeros(dim);
            for k in (0..dim).rev() {
                v[k] = coord(flat % points);
                flat /= points;
            }
            v
        })
        .collect()
}

/// Symmetric lattice with `21^d` points and half-width
/// `|ν0| + sup|∇g| + sup|∇f| + (T − t0)`, the a-priori size of optimal adjoints.
pub fn default_start_lattice(spec: &ModelSpec, t0: f64, nu0: &Vector) -> Vec<Vector> {
    let tau = (spec.horizon - t0).max(0.0);
    let reach = nu0.norm() + tau;
    let width = nu0.norm()
        + spec.g.gradient_bound_on(2.0 * reach + 1.0)
        + spec.f.gradient_bound_on(2.0 * reach + 1.0)
        + tau;
    start_lattice(spec.dim(), width.max(1.0), 21)
}

/// Multi-start shooting: runs every start in parallel, merges duplicates,
/// sorts by cost and classifies minimizers against the minimal cost.
pub fn enumerate_stationary(
    spec: &ModelSpec,
    t0: f64,
    nu0: &Vector,
    starts: &[Vector],
    opts: &ShootingOptions,
) -> Result<StationarySet> {
    Problem::new(spec, t0, nu0, opts)?;
    if starts.is_empty() {
        return Err(Error::InvalidInput("empty start grid".into()));
    }
    let outcomes: Vec<Result<OCSolution>> = starts
        .par_iter()
        .map(|s| shoot(spec, t0, nu0, s, opts))
        .collect();

    let mut failed = 0;
    let mut kept: Vec<OCSolution> = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(sol) => {
                let dup = kept
                    .iter()
                    .any(|k| (k.eta0() - sol.eta0()).amax() < opts.dedup_tolerance);
                if !dup {
                    kept.push(sol);
                }
            }
            Err(Error::NoConvergence { .. }) | Err(Error::IntegrationDiverged { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::NoStationaryPoint { starts: starts.len() });
    }
    kept.sort_by(|a, b| {
        a.cost.total_cmp(&b.cost).then_with(|| {
            a.eta0()
                .iter()
                .zip(b.eta0().iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let min_cost = kept[0].cost;
    let tie = opts.cost_tie_tolerance * min_cost.abs().max(1.0);
    let mut multiplicity = 0;
    for sol in &mut kept {
        if sol.cost - min_cost <= tie {
            sol.classification = Classification::Minimizer;
            multiplicity += 1;
        } else {
            sol.classification = Classification::StationaryOnly;
        }
    }
    Ok(StationarySet {
        solutions: kept,
        min_cost,
        multiplicity,
        starts: starts.len(),
        failed_starts: failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ModelFamily, ModelOptions};

    fn logcosh(nu0: f64) -> ModelSpec {
        ModelFamily::LogCosh { kappa: 4.0 }
            .build(&ModelOptions { nu0: vec![nu0], ..Default::default() })
            .unwrap()
    }

    #[test]
    fn null_system_is_stationary() {
        let spec = ModelFamily::Quadratic { c: 0.0 }.build(&ModelOptions::default()).unwrap();
        let z = Vector::zeros(1);
        let sol = shoot(&spec, 0.0, &z, &z, &ShootingOptions::default()).unwrap();
        assert_eq!(sol.residual, 0.0);
        assert!(sol.m.iter().chain(sol.eta.iter()).all(|v| v[0] == 0.0));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn lattice_is_symmetric() {
        let l = start_lattice(2, 3.0, 5);
        assert_eq!(l.len(), 25);
        for v in &l {
            assert!(l.iter().any(|w| w == &(-v)));
        }
        assert_eq!(l[12], Vector::zeros(2));
    }

    #[test]
    fn horizon_start_is_terminal_condition() {
        let spec = logcosh(0.3);
        let nu0 = Vector::from_element(1, 0.3);
        let sol = shoot(&spec, 1.0, &nu0, &Vector::zeros(1), &ShootingOptions::default()).unwrap();
        let expect = 0.5 * 0.09 + spec.g.value(&nu0);
        assert!((sol.cost - expect).abs() < 1e-15);
    }

    #[test]
    fn off_center_logcosh_has_positive_minimizer() {
        let spec = logcosh(0.5);
        let nu0 = spec.nu0.clone();
        let set = enumerate_stationary(&spec, 0.0, &nu0, &default_start_lattice(&spec, 0.0, &nu0), &ShootingOptions::default()).unwrap();
        assert_eq!(set.multiplicity, 1);
        assert!(set.best().terminal()[0] > 0.0);
        assert_eq!(set.solutions.len(), 3);
        let neg = set.solutions.iter().filter(|s| s.terminal()[0] < -0.5).count();
        assert_eq!(neg, 1);
    }
}
