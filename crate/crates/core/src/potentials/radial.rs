use std::fmt;
use std::sync::Arc;

use super::logcosh::neg_kappa_log_cosh;
use super::{Bounds, Potential};
use crate::numerics::{Matrix, Vector};
use crate::{Error, Result};

/// Scalar profile `g̃` of a radial potential `g(m) = g̃(|m|)`.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
    /// Sup of `|g̃'|` and `|g̃''|` on `[0, ∞)`.
    fn sup_d1(&self) -> f64;
    fn sup_d2(&self) -> f64;
}

/// `g̃(r) = −κ log cosh r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoshProfile {
    pub kappa: f64,
}

impl RadialProfile for LogCoshProfile {
    fn name(&self) -> String {
        format!("logcosh({})", self.kappa)
    }

    fn value(&self, r: f64) -> f64 {
        neg_kappa_log_cosh(self.kappa, r)
    }

    fn d1(&self, r: f64) -> f64 {
        -self.kappa * r.tanh()
    }

    fn d2(&self, r: f64) -> f64 {
        let c = r.cosh();
        -self.kappa / (c * c)
    }

    fn sup_d1(&self) -> f64 {
        self.kappa.abs()
    }

    fn sup_d2(&self) -> f64 {
        self.kappa.abs()
    }
}

/// Below this radius the Hessian is replaced by its limit `g̃''(0) I`.
const ORIGIN_RADIUS: f64 = 1e-7;

/// `g(m) = g̃(|m|)` in dimension `d`.
///
/// All quantities depend on `m` only through `|m|` and products `m_i m_j`,
/// so 90° grid rotations and reflections commute with evaluation exactly.
#[derive(Debug, Clone)]
pub struct Radial {
    profile: Arc<dyn RadialProfile>,
    dim: usize,
}

pub fn make_radial_terminal(profile: Arc<dyn RadialProfile>, dim: usize) -> Result<Radial> {
    if dim == 0 {
        return Err(Error::InvalidParameter("radial potential needs d >= 1".into()));
    }
    let slope0 = profile.d1(0.0);
    if slope0.abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "radial profile must have zero slope at the origin, got {slope0}"
        )));
    }
    Ok(Radial { profile, dim })
}

impl Radial {
    pub fn profile(&self) -> &dyn RadialProfile {
        self.profile.as_ref()
    }

    fn radius(m: &Vector) -> f64 {
        m.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Potential for Radial {
    fn name(&self) -> String {
        format!("radial_{}_d{}", self.profile.name(), self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, m: &Vector) -> f64 {
        self.profile.value(Self::radius(m))
    }

    fn gradient(&self, m: &Vector) -> Vector {
        let r = Self::radius(m);
        if r == 0.0 {
            return Vector::zeros(self.dim);
        }
        let s = self.profile.d1(r) / r;
        m.map(|v| s * v)
    }

    fn hessian(&self, m: &Vector) -> Result<Matrix> {
        let r = Self::radius(m);
        if r < ORIGIN_RADIUS {
            return Ok(Matrix::identity(self.dim, self.dim) * self.profile.d2(0.0));
        }
        let tangential = self.profile.d1(r) / r;
        let radial = (self.profile.d2(r) - tangential) / (r * r);
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| {
            let outer = radial * (m[i] * m[j]);
            if i == j {
                outer + tangential
            } else {
                outer
            }
        }))
    }

    fn bounds(&self) -> Bounds {
        let s1 = self.profile.sup_d1();
        let s2 = self.profile.sup_d2();
        Bounds {
            grad_sup: Some(s1),
            grad_lip: Some(s2),
            hess_sup: Some(s2),
            hess_lip: Some(2.0 * s2),
            hess_m_sup: Some(s2),
            hess_m_lip: Some(2.0 * s2),
        }
    }

    fn is_even(&self) -> bool {
        true
    }

    fn radial_profile(&self) -> Option<&dyn RadialProfile> {
        Some(self.profile.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::make_logcosh_terminal;

    #[derive(Debug)]
    struct Tilted;

    impl RadialProfile for Tilted {
        fn name(&self) -> String {
            "tilted".into()
        }
        fn value(&self, r: f64) -> f64 {
            r
        }
        fn d1(&self, _r: f64) -> f64 {
            1.0
        }
        fn d2(&self, _r: f64) -> f64 {
            0.0
        }
        fn sup_d1(&self) -> f64 {
            1.0
        }
        fn sup_d2(&self) -> f64 {
            0.0
        }
    }

    fn logcosh2() -> Radial {
        make_radial_terminal(Arc::new(LogCoshProfile { kappa: 4.0 }), 2).unwrap()
    }

    #[test]
    fn rejects_nonzero_slope_at_origin() {
        assert!(make_radial_terminal(Arc::new(Tilted), 2).is_err());
    }

    #[test]
    fn origin_values() {
        let g = logcosh2();
        let z = Vector::zeros(2);
        assert_eq!(g.gradient(&z), Vector::zeros(2));
        assert_eq!(g.hessian(&z).unwrap(), Matrix::identity(2, 2) * -4.0);
    }

    #[test]
    fn ray_restriction_matches_one_dimensional_family() {
        let g = logcosh2();
        let one = make_logcosh_terminal(4.0).unwrap();
        for i in 0..50 {
            let r = 0.1 * i as f64;
            let v2 = g.value(&Vector::from_vec(vec![r, 0.0]));
            let v1 = one.value(&Vector::from_element(1, r));
            assert!((v1 - v2).abs() < 1e-14);
        }
    }

    #[test]
    fn rotation_equivariance() {
        let g = logcosh2();
        let theta: f64 = 0.7317;
        let rot = Matrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5), (-0.01, 0.02)] {
            let m = Vector::from_vec(vec![x, y]);
            let lhs = g.gradient(&(&rot * &m));
            let rhs = &rot * g.gradient(&m);
            assert!((lhs - rhs).amax() < 1e-13);
            let h_rot = g.hessian(&(&rot * &m)).unwrap();
            let h = &rot * g.hessian(&m).unwrap() * rot.transpose();
            assert!((h_rot - h).amax() < 1e-12);
        }
    }

    #[test]
    fn quarter_turn_is_bitwise() {
        let g = logcosh2();
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5), (-0.04, 0.02)] {
            let m = Vector::from_vec(vec![x, y]);
            let rm = Vector::from_vec(vec![-y, x]);
            let gm = g.gradient(&m);
            let grm = g.gradient(&rm);
            assert_eq!(grm[0], -gm[1]);
            assert_eq!(grm[1], gm[0]);
            let h = g.hessian(&m).unwrap();
            let hr = g.hessian(&rm).unwrap();
            assert_eq!(hr[(0, 0)], h[(1, 1)]);
            assert_eq!(hr[(0, 1)], -h[(0, 1)]);
            assert_eq!(g.value(&m), g.value(&rm));
        }
    }
}
