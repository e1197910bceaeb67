use super::{Bounds, Potential};
use crate::numerics::{Matrix, Vector};
use crate::{Error, Result};

/// `−κ log cosh x`, computed without overflow.
pub(crate) fn neg_kappa_log_cosh(kappa: f64, x: f64) -> f64 {
    let a = x.abs();
    -kappa * (a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2)
}

/// `g(m) = −κ log cosh m` in one dimension, `κ > 2`.
///
/// Concave and even with two symmetric minimizers of the static problem;
/// `g'' + 2 < 0` exactly on `|m| < arccosh(√(κ/2))`. Odd quantities are
/// evaluated on `|m|` and signed afterwards so that `g'(−m) = −g'(m)` holds
/// bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCosh {
    kappa: f64,
}

pub fn make_logcosh_terminal(kappa: f64) -> Result<LogCosh> {
    if !(kappa > 2.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "log-cosh coupling needs kappa > 2 for two minimizers, got {kappa}"
        )));
    }
    Ok(LogCosh { kappa })
}

impl LogCosh {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `C₊ = arccosh(√(κ/2))`, where `g'' + 2` changes sign.
    pub fn concavity_threshold(&self) -> f64 {
        (self.kappa / 2.0).sqrt().acosh()
    }

    pub fn d1(&self, m: f64) -> f64 {
        let v = -self.kappa * m.abs().tanh();
        if m < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn d2(&self, m: f64) -> f64 {
        let c = m.abs().cosh();
        -self.kappa / (c * c)
    }
}

impl Potential for LogCosh {
    fn name(&self) -> String {
        format!("logcosh({})", self.kappa)
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, m: &Vector) -> f64 {
        neg_kappa_log_cosh(self.kappa, m[0])
    }

    fn gradient(&self, m: &Vector) -> Vector {
        Vector::from_element(1, self.d1(m[0]))
    }

    fn hessian(&self, m: &Vector) -> Result<Matrix> {
        Ok(Matrix::from_element(1, 1, self.d2(m[0])))
    }

    fn bounds(&self) -> Bounds {
        let k = self.kappa;
        Bounds {
            grad_sup: Some(k),
            grad_lip: Some(k),
            hess_sup: Some(k),
            // sup |2 sech² tanh| = 4 / (3√3)
            hess_lip: Some(0.7699 * k),
            // sup |m sech² m| ≈ 0.4477
            hess_m_sup: Some(0.448 * k),
            hess_m_lip: Some(k),
        }
    }

    fn is_even(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_single_minimum_regime() {
        assert!(make_logcosh_terminal(2.0).is_err());
        assert!(make_logcosh_terminal(1.0).is_err());
        assert!(make_logcosh_terminal(f64::NAN).is_err());
    }

    #[test]
    fn values_at_origin_and_threshold() {
        let g = make_logcosh_terminal(4.0).unwrap();
        assert_eq!(g.d1(0.0), 0.0);
        assert_eq!(g.d2(0.0), -4.0);
        let c = g.concavity_threshold();
        assert!((c - 0.881_373_587).abs() < 1e-8);
        assert!((g.d2(c) + 2.0).abs() < 1e-12);
        assert!(g.d2(0.5 * c) + 2.0 < 0.0 && g.d2(1.5 * c) + 2.0 > 0.0);
    }

    #[test]
    fn even_and_odd_bitwise() {
        let g = make_logcosh_terminal(4.0).unwrap();
        for i in 0..200 {
            let m = -5.0 + 0.05 * i as f64 + 1e-3;
            let p = Vector::from_element(1, m);
            let q = Vector::from_element(1, -m);
            assert_eq!(g.value(&p), g.value(&q));
            assert_eq!(g.gradient(&p)[0], -g.gradient(&q)[0]);
            assert_eq!(g.d2(m), g.d2(-m));
        }
        // no overflow far out
        assert!(g.value(&Vector::from_element(1, 800.0)).is_finite());
    }
}
