use crate::numerics::{riccati_backward, symmetrize, Matrix, TimeGrid, Vector};
use crate::potentials::{grad_f_weighted, grad_g_weighted, ModelSpec};
use crate::{Error, Result};

use super::{DecouplingField, FieldProblem};

/// Closed-form decoupling field `u(t, m) = P(t) m + r(t)` for quadratic
/// data, where `∇F_N(m) = A_f m + a_f` and `∇G_N(m) = A_g m + a_g` are
/// affine and
/// `P' = P² − P b − bᵀ P − A_f`, `P(T) = A_g`,
/// `r' = (P − bᵀ) r − a_f`, `r(T) = a_g`.
///
/// The diffusion drops out because `u` is affine in `m`.
#[derive(Debug, Clone)]
pub struct RiccatiField {
    pub times: TimeGrid,
    pub p: Vec<Matrix>,
    pub r: Vec<Vector>,
    drift: Matrix,
    a_f: Matrix,
    k_f: Vector,
}

/// Coefficients of an affine map, read off from its values at 0 and `e_j`.
fn affine_coefficients(dim: usize, map: impl Fn(&Vector) -> Result<Vector>) -> Result<(Matrix, Vector)> {
    let offset = map(&Vector::zeros(dim))?;
    let mut a = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let col = map(&Vector::from_fn(dim, |i, _| if i == j { 1.0 } else { 0.0 }))? - &offset;
        a.set_column(j, &col);
    }
    Ok((symmetrize(&a), offset))
}

/// Riccati oracle on `[0, T]` with `steps` uniform steps.
pub fn riccati_field_oracle(spec: &ModelSpec, problem: &FieldProblem, steps: usize) -> Result<RiccatiField> {
    spec.validate()?;
    if spec.f.quadratic_form().is_none() || spec.g.quadratic_form().is_none() {
        return Err(Error::InvalidOracle(format!(
            "model {} is not linear-quadratic",
            spec.name
        )));
    }
    let d = spec.dim();
    let w = problem.reminder_weight;
    let (a_f, k_f) = affine_coefficients(d, |m| grad_f_weighted(spec, w, m))?;
    let (a_g, k_g) = affine_coefficients(d, |m| grad_g_weighted(spec, w, m))?;

    // P on a grid twice as fine supplies the half-step values RK4 needs for r
    let fine = TimeGrid::new(0.0, spec.horizon, 2 * steps)?;
    let p_fine = riccati_backward(&spec.drift, &a_f, &a_g, &fine)?;
    let bt = spec.drift.transpose();
    let rhs = |p: &Matrix, r: &Vector| (p - &bt) * r - &k_f;

    let times = TimeGrid::new(0.0, spec.horizon, steps)?;
    let h = -times.dt();
    let mut r = vec![Vector::zeros(d); steps + 1];
    r[steps] = k_g;
    for k in (0..steps).rev() {
        let (p_end, p_mid, p_start) = (&p_fine[2 * k + 2], &p_fine[2 * k + 1], &p_fine[2 * k]);
        let x = &r[k + 1];
        let k1 = rhs(p_end, x);
        let k2 = rhs(p_mid, &(x + &k1 * (0.5 * h)));
        let k3 = rhs(p_mid, &(x + &k2 * (0.5 * h)));
        let k4 = rhs(p_start, &(x + &k3 * h));
        r[k] = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    let p = p_fine.into_iter().step_by(2).collect();
    Ok(RiccatiField { times, p, r, drift: spec.drift.clone(), a_f, k_f })
}

impl RiccatiField {
    /// `(u, ∂t u)` at node `k`, the time derivative taken from the ODEs.
    fn node_jet(&self, k: usize, m: &Vector) -> (Vector, Vector) {
        let (p, r) = (&self.p[k], &self.r[k]);
        let bt = self.drift.transpose();
        let dp = p * p - p * &self.drift - &bt * p - &self.a_f;
        let dr = (p - &bt) * r - &self.k_f;
        (p * m + r, dp * m + dr)
    }

    /// Cubic Hermite interpolation in time between stored nodes.
    pub fn eval(&self, t: f64, m: &Vector) -> Vector {
        let (k, s) = self.times.locate(t);
        let (u0, d0) = self.node_jet(k, m);
        if s == 0.0 {
            return u0;
        }
        let (u1, d1) = self.node_jet(k + 1, m);
        let h = self.times.dt();
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        u0 * h00 + d0 * (h10 * h) + u1 * h01 + d1 * (h11 * h)
    }
}

/// Agreement between a solved field and the oracle over all stored levels
/// at nodes with `max_k |m_k| ≤ fraction · L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleError {
    pub max_abs: f64,
    /// `max_abs / max |oracle|` over the same nodes.
    pub max_rel: f64,
}

pub fn oracle_error(field: &DecouplingField, oracle: &RiccatiField, fraction: f64) -> OracleError {
    let d = field.dim();
    let limit = fraction * field.grid.half_width();
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..field.times.nodes() {
        let t = field.times.time(k);
        for p in 0..field.grid.len() {
            let x = field.grid.point(p);
            if x.iter().any(|v| v.abs() > limit) {
                continue;
            }
            let exact = oracle.eval(t, &Vector::from_vec(x));
            let got = field.node_value(k, p);
            for c in 0..d {
                max_abs = max_abs.max((got[c] - exact[c]).abs());
                scale = scale.max(exact[c].abs());
            }
        }
    }
    let max_rel = if scale > 0.0 { max_abs / scale } else { max_abs };
    OracleError { max_abs, max_rel }
}
