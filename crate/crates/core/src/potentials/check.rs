use super::{grad_f_weighted, grad_g_weighted, running_cost, terminal_cost, ModelSpec, Potential};
use crate::numerics::{Matrix, Vector};
use crate::Result;

/// Largest entrywise deviation between analytic derivatives and fourth-order
/// central differences, each measured as `|Δ| / (1 + |reference|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeDefect {
    pub gradient: f64,
    pub hessian: f64,
}

/// `(−φ(2h) + 8φ(h) − 8φ(−h) + φ(−2h)) / 12h` along axis `k`.
fn central4<T, F>(m: &Vector, k: usize, h: f64, phi: F) -> T
where
    F: Fn(&Vector) -> T,
    T: std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let at = |s: f64| {
        let mut x = m.clone();
        x[k] += s;
        phi(&x)
    };
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) * (1.0 / (12.0 * h))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Checks `∇p` against differences of `p` and `∇²p` against differences of `∇p`.
pub fn derivative_defect(p: &dyn Potential, m: &Vector, h: f64) -> Result<DerivativeDefect> {
    let d = m.len();
    let grad = p.gradient(m);
    let hess: Matrix = p.hessian(m)?;
    let mut out = DerivativeDefect { gradient: 0.0, hessian: 0.0 };
    for k in 0..d {
        let gk = central4(m, k, h, |x| p.value(x));
        out.gradient = out.gradient.max(rel(grad[k], gk));
        let col = central4(m, k, h, |x| p.gradient(x));
        for i in 0..d {
            out.hessian = out.hessian.max(rel(hess[(i, k)], col[i]));
        }
    }
    Ok(out)
}

/// Checks the corrected gradients `∇G_N`, `∇F_N` against differences of the
/// corrected costs `G_N`, `F_N` (the reminder identities); returns the
/// terminal and running defects.
pub fn cost_gradient_defect(spec: &ModelSpec, inv_n: f64, m: &Vector, h: f64) -> Result<(f64, f64)> {
    let g = grad_g_weighted(spec, inv_n, m)?;
    let f = grad_f_weighted(spec, inv_n, m)?;
    let (mut dg, mut df) = (0.0f64, 0.0f64);
    for k in 0..m.len() {
        dg = dg.max(rel(g[k], central4(m, k, h, |x| terminal_cost(spec, inv_n, x))));
        df = df.max(rel(f[k], central4(m, k, h, |x| running_cost(spec, inv_n, x))));
    }
    Ok((dg, df))
}
