use crate::numerics::Vector;
use crate::potentials::{ModelSpec, RunningCost};
use crate::{Error, Result};

/// `U(t0, ν0, a) = (T − t0)/2 |a|² + G(ν0 + (T − t0) a)` with
/// `G(y) = ½|y|² + g(y)`: the cost of the constant control `a`.
pub fn static_u(spec: &ModelSpec, t0: f64, nu0: &Vector, a: &Vector) -> Result<f64> {
    check_reducible(spec)?;
    let tau = spec.horizon - t0;
    let y = nu0 + a * tau;
    Ok(0.5 * tau * a.norm_squared() + 0.5 * y.norm_squared() + spec.g.value(&y))
}

fn check_reducible(spec: &ModelSpec) -> Result<()> {
    if !spec.has_zero_drift() {
        return Err(Error::InvalidReduction("drift must vanish".into()));
    }
    if spec.running != RunningCost::ControlOnly || !spec.f.is_zero() {
        return Err(Error::InvalidReduction(
            "running cost must be the control effort alone (f = 0)".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum StaticMinimizers {
    Points(Vec<Vector>),
    /// Every `a` with `|a| = radius` (radial data started at the origin).
    Sphere { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticMinimum {
    pub value: f64,
    pub minimizers: StaticMinimizers,
    /// All local minimizers found by the scan, as `(a, U(a))`.
    pub local: Vec<(Vector, f64)>,
}

/// Minimizes `a ↦ U(t0, ν0, a)`: a dense scan plus bisection on `U'` in
/// one dimension; radial data in higher dimension reduce to the line
/// through `ν0`.
pub fn static_minimize(spec: &ModelSpec, t0: f64, nu0: &Vector) -> Result<StaticMinimum> {
    check_reducible(spec)?;
    let tau = spec.horizon - t0;
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("t0 = {t0} beyond the horizon")));
    }
    let d = spec.dim();
    if tau == 0.0 {
        let value = static_u(spec, t0, nu0, &Vector::zeros(d))?;
        return Ok(StaticMinimum {
            value,
            minimizers: StaticMinimizers::Points(vec![Vector::zeros(d)]),
            local: vec![(Vector::zeros(d), value)],
        });
    }
    let tie = |best: f64| 1e-9 * best.abs().max(1.0);

    if d == 1 {
        let g = |y: f64| spec.g.value(&Vector::from_element(1, y));
        let dg = |y: f64| spec.g.gradient(&Vector::from_element(1, y))[0];
        let local = scan_minima(tau, nu0[0], &g, &dg);
        let best = local.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let pts = local
            .iter()
            .filter(|p| p.1 - best <= tie(best))
            .map(|p| Vector::from_element(1, p.0))
            .collect();
        return Ok(StaticMinimum {
            value: best,
            minimizers: StaticMinimizers::Points(pts),
            local: local.iter().map(|p| (Vector::from_element(1, p.0), p.1)).collect(),
        });
    }

    let profile = spec.g.radial_profile().ok_or_else(|| {
        Error::InvalidReduction("dimension above one needs a radial terminal potential".into())
    })?;
    let n = nu0.norm();
    let dir = if n > 0.0 {
        nu0 / n
    } else {
        let mut e = Vector::zeros(d);
        e[0] = 1.0;
        e
    };
    // along the line ν0 + τ s e the potential reads g̃(|n + τ s|)
    let g = |y: f64| profile.value(y.abs());
    let dg = |y: f64| profile.d1(y.abs()) * y.signum();
    let local = scan_minima(tau, n, &g, &dg);
    let best = local.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let winners: Vec<f64> = local.iter().filter(|p| p.1 - best <= tie(best)).map(|p| p.0).collect();
    let minimizers = if n == 0.0 {
        StaticMinimizers::Sphere { radius: winners.iter().fold(0.0, |r: f64, s| r.max(s.abs())) }
    } else {
        StaticMinimizers::Points(winners.iter().map(|s| &dir * *s).collect())
    };
    Ok(StaticMinimum {
        value: best,
        minimizers,
        local: local.iter().map(|p| (&dir * p.0, p.1)).collect(),
    })
}

/// Local minima of `u(a) = τa²/2 + ½y² + g(y)`, `y = x + τa`, as `(a, u(a))`.
fn scan_minima(tau: f64, x: f64, g: &dyn Fn(f64) -> f64, dg: &dyn Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let u = |a: f64| {
        let y = x + tau * a;
        0.5 * tau * a * a + 0.5 * y * y + g(y)
    };
    // u'(a)/τ = a + y + g'(y)
    let du = |a: f64| {
        let y = x + tau * a;
        a + y + dg(y)
    };
    let mut bound = x.abs() + dg(x).abs() + 1.0;
    while !(du(bound) > 0.0 && du(-bound) < 0.0) {
        bound *= 2.0;
        if bound > 1e8 {
            break;
        }
    }
    const SCAN: usize = 4000;
    let h = 2.0 * bound / SCAN as f64;
    let node = |i: usize| -bound + h * i as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut prev = du(node(0));
    for i in 1..=SCAN {
        let cur = du(node(i));
        if prev < 0.0 && cur >= 0.0 {
            let (mut lo, mut hi) = (node(i - 1), node(i));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if du(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                    break;
                }
            }
            let a = 0.5 * (lo + hi);
            out.push((a, u(a)));
        }
        prev = cur;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ModelFamily, ModelOptions};

    #[test]
    fn rejects_drift_or_tracking() {
        let q = ModelFamily::Quadratic { c: 1.0 }.build(&ModelOptions::default()).unwrap();
        assert!(matches!(static_u(&q, 0.0, &Vector::zeros(1), &Vector::zeros(1)), Err(Error::InvalidReduction(_))));
        let lc = ModelFamily::LogCosh { kappa: 4.0 }
            .build(&ModelOptions { drift: 0.5, ..Default::default() })
            .unwrap();
        assert!(matches!(static_minimize(&lc, 0.0, &Vector::zeros(1)), Err(Error::InvalidReduction(_))));
    }

    #[test]
    fn logcosh_pair_of_minimizers() {
        let spec = ModelFamily::LogCosh { kappa: 4.0 }.build(&ModelOptions::default()).unwrap();
        let min = static_minimize(&spec, 0.0, &Vector::zeros(1)).unwrap();
        let StaticMinimizers::Points(pts) = &min.minimizers else { panic!() };
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0][0], -pts[1][0]);
        assert!((pts[1][0] - 1.915).abs() < 1e-3);
        assert!((2.0 * pts[1][0] - 4.0 * pts[1][0].tanh()).abs() < 1e-12);
    }

    #[test]
    fn radial_origin_gives_sphere() {
        let spec = ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }.build(&ModelOptions::default()).unwrap();
        let min = static_minimize(&spec, 0.0, &Vector::zeros(2)).unwrap();
        let StaticMinimizers::Sphere { radius } = min.minimizers else { panic!() };
        assert!((2.0 * radius - 4.0 * radius.tanh()).abs() < 1e-12);
        for theta in [0.0, 1.0, 2.5, 4.0] {
            let a = Vector::from_vec(vec![radius * f64::cos(theta), radius * f64::sin(theta)]);
            let v = static_u(&spec, 0.0, &Vector::zeros(2), &a).unwrap();
            assert!((v - min.value).abs() < 1e-12);
        }
    }
}
