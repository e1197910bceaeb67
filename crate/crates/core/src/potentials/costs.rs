use super::{ModelSpec, Potential};
use crate::numerics::Vector;
use crate::Result;

/// `R_p(m) = ½|∇p(m)|² + m·∇p(m) − p(m)`.
pub fn reminder(p: &dyn Potential, m: &Vector) -> f64 {
    let grad = p.gradient(m);
    0.5 * grad.norm_squared() + m.dot(&grad) - p.value(m)
}

/// Running cost of the mean with reminder weight `inv_n` (`1/N`, or 0 in
/// the limit): `F_N(m) = ½ q|m|² + f(m) + R_f(m)/N`, `q` the state weight.
pub fn running_cost(spec: &ModelSpec, inv_n: f64, m: &Vector) -> f64 {
    let f = spec.f.as_ref();
    let mut c = 0.5 * spec.state_weight() * m.norm_squared();
    if !f.is_zero() {
        c += f.value(m) + inv_n * reminder(f, m);
    }
    c
}

/// `G_N(m) = ½|m|² + g(m) + R_g(m)/N`.
pub fn terminal_cost(spec: &ModelSpec, inv_n: f64, m: &Vector) -> f64 {
    let g = spec.g.as_ref();
    0.5 * m.norm_squared() + g.value(m) + inv_n * reminder(g, m)
}

/// `∇F_N(m) = q m + ∇f(m) + ∇²f(m)(m + ∇f(m)) / N`; with `q = 1` this is
/// `(I + ∇²f/N)(m + ∇f)`.
pub fn grad_f_weighted(spec: &ModelSpec, inv_n: f64, m: &Vector) -> Result<Vector> {
    let f = spec.f.as_ref();
    let mut out = m * spec.state_weight();
    if !f.is_zero() {
        let grad = f.gradient(m);
        if inv_n != 0.0 {
            out += f.hessian(m)? * (m + &grad) * inv_n;
        }
        out += grad;
    }
    Ok(out)
}

/// `∇G_N(m) = (I + ∇²g/N)(m + ∇g)`.
pub fn grad_g_weighted(spec: &ModelSpec, inv_n: f64, m: &Vector) -> Result<Vector> {
    let g = spec.g.as_ref();
    let x = m + g.gradient(m);
    if inv_n == 0.0 {
        return Ok(x);
    }
    let h = g.hessian(m)?;
    let d = m.len();
    // (I + H/N) x, summed term by term in index order
    Ok(Vector::from_fn(d, |i, _| {
        let mut acc = 0.0;
        for j in 0..d {
            let a = if i == j { 1.0 + h[(i, j)] * inv_n } else { h[(i, j)] * inv_n };
            acc += a * x[j];
        }
        acc
    }))
}

pub fn grad_f_n(spec: &ModelSpec, n: usize, m: &Vector) -> Result<Vector> {
    grad_f_weighted(spec, 1.0 / n as f64, m)
}

pub fn grad_g_n(spec: &ModelSpec, n: usize, m: &Vector) -> Result<Vector> {
    grad_g_weighted(spec, 1.0 / n as f64, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ModelFamily, ModelOptions, Quadratic, Zero};

    #[test]
    fn reminder_of_zero_linear_and_quadratic() {
        let m = Vector::from_element(1, 0.7);
        assert_eq!(reminder(&Zero::new(1), &m), 0.0);

        let c = 1.5;
        let q = Quadratic::isotropic(1, c).unwrap();
        let expect = 0.5 * c * c * 0.49 + 0.5 * c * 0.49;
        assert!((reminder(&q, &m) - expect).abs() < 1e-14);

        let kappa = -0.8;
        let lin = Quadratic::linear(Vector::from_element(1, kappa)).unwrap();
        for x in [-2.0, 0.0, 3.5] {
            let r = reminder(&lin, &Vector::from_element(1, x));
            assert!((r - 0.5 * kappa * kappa).abs() < 1e-14);
        }
    }

    #[test]
    fn corrected_gradients_closed_forms() {
        let c = 2.0;
        let spec = ModelFamily::Quadratic { c }
            .build(&ModelOptions::default())
            .unwrap();
        // g quadratic, f = 0 tracking: ∇F_N = m, ∇G_N = (1 + c/N)(1 + c) m
        let m = Vector::from_element(1, 0.3);
        for n in [1, 10, 1000] {
            assert_eq!(grad_f_n(&spec, n, &m).unwrap()[0], 0.3);
            let g = grad_g_n(&spec, n, &m).unwrap()[0];
            let expect = (1.0 + c / n as f64) * (1.0 + c) * 0.3;
            assert!((g - expect).abs() < 1e-14);
        }
        assert!((grad_g_weighted(&spec, 0.0, &m).unwrap()[0] - (1.0 + c) * 0.3).abs() < 1e-15);

        // f quadratic: ∇F_N = (1 + c/N)(1 + c) m
        let mut spec_f = spec.clone();
        spec_f.f = std::sync::Arc::new(Quadratic::isotropic(1, c).unwrap());
        let got = grad_f_n(&spec_f, 7, &m).unwrap()[0];
        assert!((got - (1.0 + c / 7.0) * (1.0 + c) * 0.3).abs() < 1e-14);
    }
}
