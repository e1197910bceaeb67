use rayon::prelude::*;

use crate::numerics::{Matrix, RngStream, Vector};
use crate::potentials::{grad_g_weighted, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    /// Piecewise-constant control intervals.
    pub intervals: usize,
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop when the projected function-space gradient falls below this.
    pub tolerance: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            intervals: 200,
            starts: 5,
            seed: 0x5eed,
            max_iterations: 20_000,
            tolerance: 1e-10,
        }
    }
}

/// The control problem restricted to piecewise-constant controls, with
/// states propagated exactly between breakpoints and the running cost
/// integrated by Simpson's rule on each interval.
#[derive(Debug, Clone)]
pub struct DiscreteControl<'a> {
    spec: &'a ModelSpec,
    nu0: Vector,
    d: usize,
    q: f64,
    tau: f64,
    intervals: usize,
    // propagators, row-major
    a: Vec<f64>,
    b: Vec<f64>,
    a_half: Vec<f64>,
    b_half: Vec<f64>,
}

/// `(e^{bτ}, ∫_0^τ e^{bs} ds)` from the exponential of `[[b, I], [0, 0]] τ`.
fn propagators(drift: &Matrix, tau: f64) -> (Vec<f64>, Vec<f64>) {
    let d = drift.nrows();
    let mut aug = Matrix::zeros(2 * d, 2 * d);
    aug.view_mut((0, 0), (d, d)).copy_from(&(drift * tau));
    aug.view_mut((0, d), (d, d)).copy_from(&(Matrix::identity(d, d) * tau));
    let e = aug.exp();
    let flat = |c0: usize| (0..d * d).map(|i| e[(i / d, c0 + i % d)]).collect();
    (flat(0), flat(d))
}

/// `out = P x + Q y` for row-major `d × d` matrices.
fn affine(p: &[f64], x: &[f64], q: &[f64], y: &[f64], out: &mut [f64]) {
    let d = out.len();
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += p[i * d + j] * x[j] + q[i * d + j] * y[j];
        }
        out[i] = acc;
    }
}

/// `out += Pᵀ x`
fn add_transposed(p: &[f64], x: &[f64], out: &mut [f64]) {
    let d = out.len();
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += p[j * d + i] * x[j];
        }
        out[i] += acc;
    }
}

impl<'a> DiscreteControl<'a> {
    pub fn new(spec: &'a ModelSpec, t0: f64, nu0: &Vector, intervals: usize) -> Result<Self> {
        spec.validate()?;
        if nu0.len() != spec.dim() {
            return Err(Error::DimensionMismatch { expected: spec.dim(), got: nu0.len() });
        }
        if !(t0 < spec.horizon) || intervals == 0 {
            return Err(Error::InvalidParameter("need t0 < T and at least one interval".into()));
        }
        let tau = (spec.horizon - t0) / intervals as f64;
        let (a, b) = propagators(&spec.drift, tau);
        let (a_half, b_half) = propagators(&spec.drift, 0.5 * tau);
        Ok(Self {
            spec,
            nu0: nu0.clone(),
            d: spec.dim(),
            q: spec.state_weight(),
            tau,
            intervals,
            a,
            b,
            a_half,
            b_half,
        })
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn step(&self) -> f64 {
        self.tau
    }

    fn running(&self, m: &[f64]) -> f64 {
        let mut l = 0.5 * self.q * m.iter().map(|v| v * v).sum::<f64>();
        if !self.spec.f.is_zero() {
            l += self.spec.f.value(&Vector::from_column_slice(m));
        }
        l
    }

    /// `out = s · ∇L(m)`
    fn running_grad(&self, m: &[f64], s: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(m) {
            *o = s * self.q * v;
        }
        if !self.spec.f.is_zero() {
            let g = self.spec.f.gradient(&Vector::from_column_slice(m));
            for (o, v) in out.iter_mut().zip(g.iter()) {
                *o += s * v;
            }
        }
    }

    /// Cost at flat controls `x` (interval-major) with its gradient in `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let (d, k_max, tau) = (self.d, self.intervals, self.tau);
        let mut m = vec![0.0; (k_max + 1) * d];
        let mut mid = vec![0.0; k_max * d];
        m[..d].copy_from_slice(self.nu0.as_slice());
        let mut cost = 0.0;
        for k in 0..k_max {
            let beta = &x[k * d..(k + 1) * d];
            let (done, rest) = m.split_at_mut((k + 1) * d);
            let mk = &done[k * d..];
            let half = &mut mid[k * d..(k + 1) * d];
            affine(&self.a_half, mk, &self.b_half, beta, half);
            affine(&self.a, mk, &self.b, beta, &mut rest[..d]);
            cost += 0.5 * tau * beta.iter().map(|v| v * v).sum::<f64>()
                + tau / 6.0 * (self.running(mk) + 4.0 * self.running(half) + self.running(&rest[..d]));
        }
        let m_t = Vector::from_column_slice(&m[k_max * d..]);
        cost += 0.5 * m_t.norm_squared() + self.spec.g.value(&m_t);
        if !cost.is_finite() {
            return Err(Error::IntegrationDiverged { t: self.spec.horizon });
        }

        // adjoint sweep: lambda = ∂J/∂m_{k+1}
        let mut lambda = vec![0.0; d];
        let mut next = vec![0.0; d];
        let mut lm = vec![0.0; d];
        self.running_grad(m_t.as_slice(), tau / 6.0, &mut lambda);
        for (l, v) in lambda.iter_mut().zip(grad_g_weighted(self.spec, 0.0, &m_t)?.iter()) {
            *l += v;
        }
        for k in (0..k_max).rev() {
            self.running_grad(&mid[k * d..(k + 1) * d], 4.0 * tau / 6.0, &mut lm);
            let gk = &mut grad[k * d..(k + 1) * d];
            for (g, b) in gk.iter_mut().zip(&x[k * d..(k + 1) * d]) {
                *g = tau * b;
            }
            add_transposed(&self.b_half, &lm, gk);
            add_transposed(&self.b, &lambda, gk);
            let weight = if k > 0 { 2.0 } else { 1.0 };
            self.running_grad(&m[k * d..(k + 1) * d], weight * tau / 6.0, &mut next);
            add_transposed(&self.a_half, &lm, &mut next);
            add_transposed(&self.a, &lambda, &mut next);
            std::mem::swap(&mut lambda, &mut next);
        }
        Ok(cost)
    }

    /// Cost and its exact gradient with respect to each control value.
    pub fn cost_and_gradient(&self, controls: &[Vector]) -> Result<(f64, Vec<Vector>)> {
        if controls.len() != self.intervals || controls.iter().any(|c| c.len() != self.d) {
            return Err(Error::DimensionMismatch { expected: self.intervals, got: controls.len() });
        }
        let x: Vec<f64> = controls.iter().flat_map(|c| c.iter().copied()).collect();
        let mut g = vec![0.0; x.len()];
        let cost = self.eval(&x, &mut g)?;
        Ok((cost, g.chunks(self.d).map(Vector::from_column_slice).collect()))
    }

    /// `(Σ τ |∂J/∂β_k / τ|²)^{1/2}`, the gradient in the `L²(dt)` geometry.
    pub fn gradient_norm(&self, grad: &[Vector]) -> f64 {
        (grad.iter().map(|g| g.norm_squared()).sum::<f64>() / self.tau).sqrt()
    }

    /// Interval averages of a control sampled on a uniform grid with
    /// `intervals · r + 1` nodes.
    pub fn average_controls(&self, samples: &[Vector]) -> Result<Vec<Vector>> {
        let n = samples.len().saturating_sub(1);
        if n == 0 || n % self.intervals != 0 {
            return Err(Error::InvalidInput(format!(
                "{} samples do not refine {} intervals",
                samples.len(),
                self.intervals
            )));
        }
        let r = n / self.intervals;
        Ok((0..self.intervals)
            .map(|k| {
                let seg = &samples[k * r..=(k + 1) * r];
                let mut acc = (&seg[0] + &seg[r]) * 0.5;
                for s in &seg[1..r] {
                    acc += s;
                }
                acc / r as f64
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub value: f64,
    pub controls: Vec<Vector>,
    /// Final cost of every start, in start order.
    pub start_values: Vec<f64>,
}

/// Minimizes the discretized cost by projected gradient descent with
/// Barzilai–Borwein steps and Armijo backtracking from seeded random starts.
pub fn descent_value(spec: &ModelSpec, t0: f64, nu0: &Vector, opts: &DescentOptions) -> Result<DescentOutcome> {
    let problem = DiscreteControl::new(spec, t0, nu0, opts.intervals)?;
    let bound = 2.0 * spec.a_priori_bound(nu0.norm()) + 1.0;
    let d = spec.dim();
    let runs: Vec<Result<(f64, Vec<f64>)>> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut src = RngStream::new(opts.seed, i as u64).gaussian();
            let level: Vec<f64> = (0..d).map(|_| (2.0 * src.uniform() - 1.0) * 0.5 * bound).collect();
            let start: Vec<f64> = (0..problem.intervals * d)
                .map(|j| level[j % d] + 0.1 * src.standard())
                .collect();
            minimize(&problem, start, bound, opts)
        })
        .collect();
    let mut start_values = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, Vec<f64>)> = None;
    for run in runs {
        let (v, c) = run?;
        start_values.push(v);
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, c));
        }
    }
    let (value, x) = best.expect("at least one start");
    let controls = x.chunks(d).map(Vector::from_column_slice).collect();
    Ok(DescentOutcome { value, controls, start_values })
}

fn minimize(problem: &DiscreteControl, mut x: Vec<f64>, bound: f64, opts: &DescentOptions) -> Result<(f64, Vec<f64>)> {
    let clamp = |v: f64| v.clamp(-bound, bound);
    x.iter_mut().for_each(|v| *v = clamp(*v));
    let tau = problem.tau;
    let n = x.len();
    let mut gx = vec![0.0; n];
    let mut fx = problem.eval(&x, &mut gx)?;
    let mut cand = vec![0.0; n];
    let mut gc = vec![0.0; n];
    let mut alpha = 1.0 / tau;
    let mut quiet = 0;
    for _ in 0..opts.max_iterations {
        // projected-gradient stationarity measure
        let pg: f64 = x.iter().zip(&gx).map(|(xi, gi)| (xi - clamp(xi - gi / tau)).powi(2)).sum();
        if (pg * tau).sqrt() < opts.tolerance {
            break;
        }
        let mut step = alpha;
        let accepted = loop {
            let mut decrease = 0.0;
            for i in 0..n {
                cand[i] = clamp(x[i] - step * gx[i]);
                decrease += gx[i] * (cand[i] - x[i]);
            }
            let fc = problem.eval(&cand, &mut gc)?;
            if fc <= fx + 1e-4 * decrease {
                break Some(fc);
            }
            step *= 0.5;
            if step < 1e-12 / tau {
                break None;
            }
        };
        // no descent left at working precision
        let Some(fc) = accepted else { break };
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..n {
            let s = cand[i] - x[i];
            ss += s * s;
            sy += s * (gc[i] - gx[i]);
        }
        let gain = fx - fc;
        std::mem::swap(&mut x, &mut cand);
        std::mem::swap(&mut gx, &mut gc);
        fx = fc;
        if ss == 0.0 {
            break;
        }
        quiet = if gain <= 1e-15 * (1.0 + fx.abs()) { quiet + 1 } else { 0 };
        if quiet >= 10 {
            break;
        }
        alpha = if sy > 0.0 { (ss / sy).clamp(1e-6 / tau, 1e6 / tau) } else { 1.0 / tau };
    }
    Ok((fx, x))
}
