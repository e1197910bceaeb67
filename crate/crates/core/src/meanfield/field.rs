use rayon::prelude::*;

use crate::numerics::{SpaceGrid, TimeGrid, Vector};
use crate::potentials::{grad_f_weighted, grad_g_weighted, ModelSpec};
use crate::{Error, Result};

/// Which backward PDE is solved: the population size `N` (diffusion
/// `σ²/2N`, reminders weighted by `1/N`) or the common-noise intensity `ε`
/// (diffusion `ε²/2`, no reminders).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Players(usize),
    CommonNoise(f64),
    /// Noise switched off: pure transport, no reminders.
    Limit,
}

impl FieldKind {
    pub fn label(&self) -> String {
        match self {
            FieldKind::Players(n) => format!("N={n}"),
            FieldKind::CommonNoise(e) => format!("eps={e}"),
            FieldKind::Limit => "limit".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProblem {
    pub kind: FieldKind,
    /// Coefficient of the Laplacian.
    pub diffusion: f64,
    /// Weight of the reminder corrections in `∇F_N`, `∇G_N`.
    pub reminder_weight: f64,
}

impl FieldProblem {
    pub fn players(spec: &ModelSpec, n: usize) -> Result<Self> {
        spec.require_noise()?;
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        Ok(Self {
            kind: FieldKind::Players(n),
            diffusion: spec.sigma * spec.sigma / (2.0 * n as f64),
            reminder_weight: 1.0 / n as f64,
        })
    }

    pub fn common_noise(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
        }
        Ok(Self {
            kind: FieldKind::CommonNoise(eps),
            diffusion: 0.5 * eps * eps,
            reminder_weight: 0.0,
        })
    }

    /// The `N = ∞` problem.
    pub fn limit() -> Self {
        Self { kind: FieldKind::Limit, diffusion: 0.0, reminder_weight: 0.0 }
    }

    /// Same diffusion with the `1/N` corrections switched off.
    pub fn without_reminders(self) -> Self {
        Self { reminder_weight: 0.0, ..self }
    }
}

/// Backward-in-time solution `u(t, m)` of the decoupling PDE on a tensor
/// grid. Levels are stored on `times`; interpolation is multilinear in
/// space and linear in time.
#[derive(Debug, Clone)]
pub struct DecouplingField {
    pub grid: SpaceGrid,
    pub times: TimeGrid,
    /// `values[level][node * dim + component]`
    pub values: Vec<Vec<f64>>,
    pub problem: FieldProblem,
    pub model: String,
}

impl DecouplingField {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn node_value(&self, level: usize, node: usize) -> &[f64] {
        let d = self.dim();
        &self.values[level][node * d..(node + 1) * d]
    }

    fn eval_level(&self, level: usize, x: &[f64], out: &mut [f64]) {
        let u = &self.values[level];
        let d = self.dim();
        match d {
            1 => {
                let (i0, i1, w) = self.grid.axis(0).stencil(x[0]);
                out[0] = (1.0 - w) * u[i0] + w * u[i1];
            }
            _ => {
                let (i0, i1, wx) = self.grid.axis(0).stencil(x[0]);
                let (j0, j1, wy) = self.grid.axis(1).stencil(x[1]);
                let ny = self.grid.axis(1).nodes();
                let (ax, bx, ay, by) = (1.0 - wx, wx, 1.0 - wy, wy);
                let (w00, w11, w10, w01) = (ax * ay, bx * by, bx * ay, ax * by);
                for c in 0..2 {
                    let at = |i: usize, j: usize| u[(i * ny + j) * 2 + c];
                    // corner pairing keeps the sum invariant under axis swaps
                    out[c] = (w00 * at(i0, j0) + w11 * at(i1, j1)) + (w10 * at(i1, j0) + w01 * at(i0, j1));
                }
            }
        }
    }

    /// `u(t, x)`; `x` is clamped to the grid box by the stencils.
    pub fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let (k, theta) = self.times.locate(t);
        if theta == 0.0 {
            self.eval_level(k, x, out);
            return;
        }
        let mut next = [0.0; 2];
        self.eval_level(k, x, out);
        self.eval_level(k + 1, x, &mut next[..out.len()]);
        for (o, n) in out.iter_mut().zip(next) {
            *o = (1.0 - theta) * *o + theta * n;
        }
    }

    pub fn eval_vec(&self, t: f64, x: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim());
        self.eval(t, x.as_slice(), out.as_mut_slice());
        out
    }

    /// `max |u(t_k, −m) + u(t_k, m)|` over all levels and nodes of a
    /// symmetric grid.
    pub fn odd_symmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for u in &self.values {
            for p in 0..self.grid.len() {
                let q = mirror_node(&self.grid, p);
                for c in 0..d {
                    worst = worst.max((u[p * d + c] + u[q * d + c]).abs());
                }
            }
        }
        worst
    }
}

fn mirror_node(grid: &SpaceGrid, p: usize) -> usize {
    let ix = grid.multi_index(p);
    let m: Vec<usize> = (0..grid.dim())
        .map(|k| grid.axis(k).nodes() - 1 - ix[k])
        .collect();
    grid.index(&m)
}

/// Largest transport speed per axis expected during a solve: the terminal
/// layer's `|bm − u_T|` and the linear growth `(q + |b|) L`, inflated by 25%.
pub fn transport_bound(spec: &ModelSpec, problem: &FieldProblem, grid: &SpaceGrid) -> Result<Vec<f64>> {
    let d = grid.dim();
    let terminal = terminal_layer(spec, problem, grid)?;
    let mut vmax = vec![0.0_f64; d];
    for p in 0..grid.len() {
        let x = grid.point(p);
        let bm = &spec.drift * Vector::from_column_slice(&x);
        for k in 0..d {
            vmax[k] = vmax[k].max((bm[k] - terminal[p * d + k]).abs());
        }
    }
    let growth = (spec.state_weight() + spec.drift.norm()) * grid.half_width();
    Ok(vmax.into_iter().map(|v| 1.25 * v.max(growth)).collect())
}

/// Uniform time grid on `[t0, T]` whose step satisfies, with the given
/// safety factor, `ν Δt/Δx² ≤ ¼` and `|v| Δt/Δx ≤ ½` per axis and the
/// monotonicity bound `Σ_k (2ν Δt/Δx_k² + |v_k| Δt/Δx_k) ≤ 1`.
pub fn stable_time_grid(
    spec: &ModelSpec,
    problem: &FieldProblem,
    grid: &SpaceGrid,
    t0: f64,
    safety: f64,
) -> Result<TimeGrid> {
    let vmax = transport_bound(spec, problem, grid)?;
    let nu = problem.diffusion;
    let mut dt = f64::INFINITY;
    let mut mono = 0.0;
    for (k, axis) in grid.axes().iter().enumerate() {
        let h = axis.spacing();
        if nu > 0.0 {
            dt = dt.min(h * h / (4.0 * nu));
        }
        if vmax[k] > 0.0 {
            dt = dt.min(h / (2.0 * vmax[k]));
        }
        mono += 2.0 * nu / (h * h) + vmax[k] / h;
    }
    if mono > 0.0 {
        dt = dt.min(1.0 / mono);
    }
    let span = spec.horizon - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter(format!("t0 = {t0} must precede the horizon")));
    }
    let steps = if dt.is_finite() { (span / (safety * dt)).ceil().max(1.0) as usize } else { 1 };
    TimeGrid::new(t0, spec.horizon, steps)
}

fn terminal_layer(spec: &ModelSpec, problem: &FieldProblem, grid: &SpaceGrid) -> Result<Vec<f64>> {
    let d = grid.dim();
    let mut out = vec![0.0; grid.len() * d];
    for p in 0..grid.len() {
        let x = Vector::from_vec(grid.point(p));
        let g = grad_g_weighted(spec, problem.reminder_weight, &x)?;
        out[p * d..(p + 1) * d].copy_from_slice(g.as_slice());
    }
    Ok(out)
}

fn source_layer(spec: &ModelSpec, problem: &FieldProblem, grid: &SpaceGrid) -> Result<Vec<f64>> {
    let d = grid.dim();
    let mut out = vec![0.0; grid.len() * d];
    for p in 0..grid.len() {
        let x = Vector::from_vec(grid.point(p));
        let f = grad_f_weighted(spec, problem.reminder_weight, &x)?;
        out[p * d..(p + 1) * d].copy_from_slice(f.as_slice());
    }
    Ok(out)
}

/// Odd in both arguments, so mirrored stencils give negated corrections.
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

struct Stepper<'a> {
    grid: &'a SpaceGrid,
    d: usize,
    /// node strides per axis
    stride: [usize; 2],
    nodes: [usize; 2],
    h: [f64; 2],
    nu: f64,
    drift: Vec<f64>,
    zero_drift: bool,
    points: Vec<f64>,
    source: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &ModelSpec, problem: &FieldProblem, grid: &'a SpaceGrid) -> Result<Self> {
        let d = grid.dim();
        let mut stride = [1, 1];
        let mut nodes = [1, 1];
        let mut h = [1.0, 1.0];
        for k in 0..d {
            nodes[k] = grid.axis(k).nodes();
            h[k] = grid.axis(k).spacing();
        }
        if d == 2 {
            stride[0] = nodes[1];
        }
        let points = (0..grid.len()).flat_map(|p| grid.point(p)).collect();
        Ok(Self {
            grid,
            d,
            stride,
            nodes,
            h,
            nu: problem.diffusion,
            drift: (0..d * d).map(|i| spec.drift[(i / d, i % d)]).collect(),
            zero_drift: spec.has_zero_drift(),
            points,
            source: source_layer(spec, problem, grid)?,
        })
    }

    /// `(b x − u)_k` at node `p`.
    fn velocity(&self, u: &[f64], p: usize, k: usize) -> f64 {
        let d = self.d;
        let mut bx = 0.0;
        if !self.zero_drift {
            for j in 0..d {
                bx += self.drift[k * d + j] * self.points[p * d + j];
            }
        }
        bx - u[p * d + k]
    }

    fn axis_index(&self, p: usize, k: usize) -> usize {
        if self.d == 1 {
            p
        } else {
            self.grid.multi_index(p)[k]
        }
    }

    /// Diffusion plus upwinded transport along axis `k` for component `c`.
    /// One-sided differences carry a minmod-limited curvature correction
    /// (second-order ENO) away from the two outermost nodes.
    fn axis_term(&self, u: &[f64], p: usize, k: usize, c: usize, v: f64) -> f64 {
        let d = self.d;
        let i = self.axis_index(p, k);
        let s = self.stride[k];
        let h = self.h[k];
        let here = u[p * d + c];
        if i == 0 || i + 1 == self.nodes[k] {
            // linear extrapolation through the ghost node: no curvature,
            // both one-sided differences equal the inward one
            let inward = if i == 0 {
                u[(p + s) * d + c] - here
            } else {
                here - u[(p - s) * d + c]
            };
            return v * (inward / h);
        }
        let up = u[(p + s) * d + c];
        let down = u[(p - s) * d + c];
        let curv = (up + down) - 2.0 * here;
        let second_order = i >= 2 && i + 2 < self.nodes[k];
        let diff = if v > 0.0 {
            let mut dd = up - here;
            if second_order {
                let ahead = (u[(p + 2 * s) * d + c] + here) - 2.0 * up;
                dd = dd - 0.5 * minmod(curv, ahead);
            }
            dd
        } else {
            let mut dd = here - down;
            if second_order {
                let behind = (here + u[(p - 2 * s) * d + c]) - 2.0 * down;
                dd = dd + 0.5 * minmod(curv, behind);
            }
            dd
        };
        self.nu * (curv / (h * h)) + v * (diff / h)
    }

    fn step_node(&self, u: &[f64], p: usize, dt: f64, out: &mut [f64]) {
        let d = self.d;
        let mut v = [0.0; 2];
        for (k, vk) in v.iter_mut().enumerate().take(d) {
            *vk = self.velocity(u, p, k);
        }
        for c in 0..d {
            let transport = if d == 1 {
                self.axis_term(u, p, 0, c, v[0])
            } else {
                self.axis_term(u, p, 0, c, v[0]) + self.axis_term(u, p, 1, c, v[1])
            };
            let mut btu = 0.0;
            if !self.zero_drift {
                for j in 0..d {
                    btu += self.drift[j * d + c] * u[p * d + j];
                }
            }
            out[c] = u[p * d + c] + dt * ((transport + btu) + self.source[p * d + c]);
        }
    }

    fn check_transport(&self, u: &[f64], dt: f64) -> Result<()> {
        for p in 0..self.grid.len() {
            for k in 0..self.d {
                let r = self.velocity(u, p, k).abs() * dt / self.h[k];
                if r > 0.5 {
                    return Err(Error::CflViolation { ratio: "|bm - u| dt/dx", value: r, limit: 0.5 });
                }
            }
        }
        Ok(())
    }

    fn explicit(&self, u: &[f64], dt: f64, next: &mut [f64]) {
        let d = self.d;
        let row = self.stride[0] * d;
        next.par_chunks_mut(row).enumerate().for_each(|(r, chunk)| {
            let first = r * self.stride[0];
            for (off, out) in chunk.chunks_mut(d).enumerate() {
                self.step_node(u, first + off, dt, out);
            }
        });
    }

    /// Solves `(I − Δt ν Δ_h) u = rhs` by Jacobi sweeps.
    fn implicit_diffusion(&self, rhs: &[f64], dt: f64) -> Vec<f64> {
        let d = self.d;
        let lambda: Vec<f64> = (0..d).map(|k| self.nu * dt / (self.h[k] * self.h[k])).collect();
        let mut u = rhs.to_vec();
        let mut next = rhs.to_vec();
        for _ in 0..60 {
            for p in 0..self.grid.len() {
                let mut neigh = [0.0; 2];
                let mut diag = 0.0;
                for k in 0..d {
                    let i = self.axis_index(p, k);
                    if i == 0 || i + 1 == self.nodes[k] {
                        continue;
                    }
                    diag += 2.0 * lambda[k];
                    let s = self.stride[k];
                    for (c, n) in neigh.iter_mut().enumerate().take(d) {
                        *n += lambda[k] * (u[(p + s) * d + c] + u[(p - s) * d + c]);
                    }
                }
                for c in 0..d {
                    next[p * d + c] = (rhs[p * d + c] + neigh[c]) / (1.0 + diag);
                }
            }
            std::mem::swap(&mut u, &mut next);
        }
        u
    }
}

/// Backward sweep of the decoupling PDE by explicit two-stage SSP Runge-Kutta
/// `−∂t u − ν Δu − (bm − u)·∇u − bᵀu = ∇F` with `u(T) = ∇G`,
/// storing every `stride`-th level.
pub fn solve_field(
    spec: &ModelSpec,
    problem: FieldProblem,
    grid: &SpaceGrid,
    tgrid: &TimeGrid,
    stride: usize,
    smoothing: bool,
) -> Result<DecouplingField> {
    spec.validate()?;
    if grid.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: grid.dim() });
    }
    if (tgrid.t1() - spec.horizon).abs() > 1e-12 * spec.horizon.max(1.0) {
        return Err(Error::InvalidParameter("time grid must end at the horizon".into()));
    }
    let stride = stride.max(1);
    if tgrid.steps() % stride != 0 {
        return Err(Error::InvalidParameter(format!(
            "storage stride {stride} does not divide {} steps",
            tgrid.steps()
        )));
    }
    let dt = tgrid.dt();
    for axis in grid.axes() {
        let h = axis.spacing();
        let r = problem.diffusion * dt / (h * h);
        if r > 0.25 {
            return Err(Error::CflViolation { ratio: "nu dt/dx^2", value: r, limit: 0.25 });
        }
    }
    let stepper = Stepper::new(spec, &problem, grid)?;
    let terminal = terminal_layer(spec, &problem, grid)?;
    let stored_steps = tgrid.steps() / stride;
    let mut values = vec![Vec::new(); stored_steps + 1];
    let mut u = terminal;
    let mut stage = vec![0.0; u.len()];
    let mut next = vec![0.0; u.len()];
    for step in 0..tgrid.steps() {
        let level = tgrid.steps() - step;
        if level % stride == 0 {
            values[level / stride] = u.clone();
        }
        // SSP-RK2: two explicit stages averaged, monotone under the same bounds
        stepper.check_transport(&u, dt)?;
        stepper.explicit(&u, dt, &mut stage);
        stepper.check_transport(&stage, dt)?;
        stepper.explicit(&stage, dt, &mut next);
        for (n, old) in next.iter_mut().zip(&u) {
            *n = 0.5 * (*old + *n);
        }
        if step == 0 && smoothing && problem.diffusion > 0.0 {
            next = stepper.implicit_diffusion(&next, dt);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::PdeDiverged { level: level - 1, t: tgrid.time(level - 1) });
        }
        std::mem::swap(&mut u, &mut next);
    }
    values[0] = u;
    Ok(DecouplingField {
        grid: grid.clone(),
        times: TimeGrid::new(tgrid.t0(), tgrid.t1(), stored_steps)?,
        values,
        problem,
        model: spec.name.clone(),
    })
}

/// Field of the `N`-player empirical mean, every level stored.
pub fn solve_field_n(spec: &ModelSpec, n: usize, grid: &SpaceGrid, tgrid: &TimeGrid) -> Result<DecouplingField> {
    solve_field(spec, FieldProblem::players(spec, n)?, grid, tgrid, 1, true)
}

/// Field of the common-noise problem with intensity `ε`, every level stored.
pub fn solve_field_eps(spec: &ModelSpec, eps: f64, grid: &SpaceGrid, tgrid: &TimeGrid) -> Result<DecouplingField> {
    solve_field(spec, FieldProblem::common_noise(eps)?, grid, tgrid, 1, true)
}

/// Grid and step selection for a field solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSetup {
    /// Domain half-width; `None` uses the model's a-priori bound.
    pub half_width: Option<f64>,
    pub spacing: f64,
    /// Fraction of the largest stable step actually taken.
    pub safety: f64,
    /// Cap on stored time levels (memory); steps are rounded up to a
    /// multiple of the resulting stride.
    pub max_stored_levels: usize,
    pub smoothing: bool,
}

impl Default for FieldSetup {
    fn default() -> Self {
        Self {
            half_width: None,
            spacing: 0.02,
            safety: 0.9,
            max_stored_levels: 1000,
            smoothing: true,
        }
    }
}

impl FieldSetup {
    pub fn grid(&self, spec: &ModelSpec) -> Result<SpaceGrid> {
        let d = spec.dim();
        if d > 2 {
            return Err(Error::InvalidParameter(format!("field solves support d <= 2, got {d}")));
        }
        let l = self.half_width.unwrap_or_else(|| spec.default_half_width());
        SpaceGrid::symmetric_with_spacing(d, l, self.spacing)
    }

    pub fn time_grid(&self, spec: &ModelSpec, problem: &FieldProblem, grid: &SpaceGrid) -> Result<(TimeGrid, usize)> {
        let base = stable_time_grid(spec, problem, grid, 0.0, self.safety)?;
        let cap = self.max_stored_levels.max(1);
        let stride = base.steps().div_ceil(cap);
        let steps = base.steps().div_ceil(stride) * stride;
        Ok((TimeGrid::new(0.0, spec.horizon, steps)?, stride))
    }

    pub fn solve(&self, spec: &ModelSpec, problem: FieldProblem) -> Result<DecouplingField> {
        let grid = self.grid(spec)?;
        let (tgrid, stride) = self.time_grid(spec, &problem, &grid)?;
        // the transport bound is an estimate; halve the step while it is exceeded
        let mut factor = 1;
        loop {
            let tg = TimeGrid::new(0.0, spec.horizon, factor * tgrid.steps())?;
            match solve_field(spec, problem, &grid, &tg, factor * stride, self.smoothing) {
                Err(Error::CflViolation { .. }) if factor < 16 => factor *= 2,
                other => return other,
            }
        }
    }
}
