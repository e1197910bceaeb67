use super::{Bounds, Potential, QuadraticForm};
use crate::numerics::{Matrix, Vector};
use crate::{Error, Result};

/// The zero potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    dim: usize,
}

impl Zero {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Potential for Zero {
    fn name(&self) -> String {
        "zero".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _m: &Vector) -> f64 {
        0.0
    }

    fn gradient(&self, _m: &Vector) -> Vector {
        Vector::zeros(self.dim)
    }

    fn hessian(&self, _m: &Vector) -> Result<Matrix> {
        Ok(Matrix::zeros(self.dim, self.dim))
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            grad_sup: Some(0.0),
            grad_lip: Some(0.0),
            hess_sup: Some(0.0),
            hess_lip: Some(0.0),
            hess_m_sup: Some(0.0),
            hess_m_lip: Some(0.0),
        }
    }

    fn gradient_bound_on(&self, _radius: f64) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        true
    }

    fn is_even(&self) -> bool {
        true
    }

    fn quadratic_form(&self) -> Option<QuadraticForm> {
        Some(QuadraticForm {
            hessian: Matrix::zeros(self.dim, self.dim),
            linear: Vector::zeros(self.dim),
        })
    }
}

/// `p(m) = ½ mᵀ H m + k·m` with symmetric `H`.
///
/// Gradients grow linearly, so it sits outside the bounded-data regime; it
/// is the closed-form test bed for the Riccati oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    hessian: Matrix,
    linear: Vector,
}

impl Quadratic {
    pub fn new(hessian: Matrix, linear: Vector) -> Result<Self> {
        let d = linear.len();
        if d == 0 || hessian.nrows() != d || hessian.ncols() != d {
            return Err(Error::InvalidParameter(format!(
                "quadratic potential needs a {d}x{d} Hessian"
            )));
        }
        if hessian.iter().chain(linear.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("quadratic coefficients must be finite".into()));
        }
        if (&hessian - hessian.transpose()).amax() > 0.0 {
            return Err(Error::InvalidParameter("quadratic Hessian must be symmetric".into()));
        }
        Ok(Self { hessian, linear })
    }

    /// `½ c |m|²`
    pub fn isotropic(dim: usize, c: f64) -> Result<Self> {
        Self::new(Matrix::identity(dim, dim) * c, Vector::zeros(dim))
    }

    /// `κ·m`
    pub fn linear(kappa: Vector) -> Result<Self> {
        let d = kappa.len();
        Self::new(Matrix::zeros(d, d), kappa)
    }
}

impl Potential for Quadratic {
    fn name(&self) -> String {
        if self.linear.iter().all(|v| *v == 0.0) && self.hessian == Matrix::identity(self.dim(), self.dim()) * self.hessian[(0, 0)] {
            format!("quadratic({})", self.hessian[(0, 0)])
        } else {
            "quadratic".into()
        }
    }

    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, m: &Vector) -> f64 {
        0.5 * m.dot(&(&self.hessian * m)) + self.linear.dot(m)
    }

    fn gradient(&self, m: &Vector) -> Vector {
        &self.hessian * m + &self.linear
    }

    fn hessian(&self, _m: &Vector) -> Result<Matrix> {
        Ok(self.hessian.clone())
    }

    fn bounds(&self) -> Bounds {
        let h = self.hessian.norm();
        Bounds {
            grad_sup: (h == 0.0).then(|| self.linear.norm()),
            grad_lip: Some(h),
            hess_sup: Some(h),
            hess_lip: Some(0.0),
            hess_m_sup: (h == 0.0).then_some(0.0),
            hess_m_lip: Some(h),
        }
    }

    fn gradient_bound_on(&self, radius: f64) -> f64 {
        self.hessian.norm() * radius + self.linear.norm()
    }

    fn is_zero(&self) -> bool {
        self.hessian.iter().chain(self.linear.iter()).all(|v| *v == 0.0)
    }

    fn is_even(&self) -> bool {
        self.linear.iter().all(|v| *v == 0.0)
    }

    fn quadratic_form(&self) -> Option<QuadraticForm> {
        Some(QuadraticForm {
            hessian: self.hessian.clone(),
            linear: self.linear.clone(),
        })
    }
}
