use super::shooting::ShootingOptions;
use super::value::value_shooting;
use crate::numerics::Vector;
use crate::potentials::ModelSpec;
use crate::Result;

pub const DEFAULT_PROBE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Differentiable,
    Kink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Gap allowed per axis before a kink is declared.
    pub threshold: Vec<f64>,
    pub verdict: Verdict,
}

/// One-sided difference quotients of `ν ↦ v(t0, ν)` per axis. A kink is
/// declared when they differ by more than `10 h C`, with `C` the larger of
/// 1 and the one-sided second differences on either side (a heuristic
/// stand-in for the local semiconcavity constant).
pub fn differentiability_probe(spec: &ModelSpec, t0: f64, nu0: &Vector, h: f64, opts: &ShootingOptions) -> Result<ProbeResult> {
    let v = |x: &Vector| value_shooting(spec, t0, x, opts);
    let v0 = v(nu0)?;
    let d = nu0.len();
    let (mut left, mut right, mut threshold) = (Vec::new(), Vec::new(), Vec::new());
    let mut verdict = Verdict::Differentiable;
    for k in 0..d {
        let shifted = |s: f64| {
            let mut x = nu0.clone();
            x[k] += s;
            x
        };
        let (vp1, vp2) = (v(&shifted(h))?, v(&shifted(2.0 * h))?);
        let (vm1, vm2) = (v(&shifted(-h))?, v(&shifted(-2.0 * h))?);
        let l = (v0 - vm1) / h;
        let r = (vp1 - v0) / h;
        let curv_r = (vp2 - 2.0 * vp1 + v0).abs() / (h * h);
        let curv_l = (vm2 - 2.0 * vm1 + v0).abs() / (h * h);
        let thr = 10.0 * h * curv_r.max(curv_l).max(1.0);
        if (r - l).abs() > thr {
            verdict = Verdict::Kink;
        }
        left.push(l);
        right.push(r);
        threshold.push(thr);
    }
    Ok(ProbeResult { left, right, threshold, verdict })
}

/// Centered finite-difference gradient of `ν ↦ v(t0, ν)`.
pub fn value_gradient_fd(spec: &ModelSpec, t0: f64, nu0: &Vector, h: f64, opts: &ShootingOptions) -> Result<Vector> {
    let mut out = Vector::zeros(nu0.len());
    for k in 0..nu0.len() {
        let mut p = nu0.clone();
        p[k] += h;
        let mut m = nu0.clone();
        m[k] -= h;
        out[k] = (value_shooting(spec, t0, &p, opts)? - value_shooting(spec, t0, &m, opts)?) / (2.0 * h);
    }
    Ok(out)
}
