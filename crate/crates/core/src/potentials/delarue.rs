use super::{Bounds, Potential};
use crate::numerics::{delarue_riccati, Matrix, TimeGrid, Vector, DEFAULT_STEPS_PER_UNIT};
use crate::{Error, Result};

// Antiderivatives of the biweight kernel K(x) = 15/16 (1 − x²)² on [−1, 1]:
// S0 = ∫K (its CDF), S1 = ∫S0, S2 = ∫S1, all vanishing left of −1.
fn s0(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x2 = x * x;
        15.0 / 16.0 * x * (1.0 - 2.0 / 3.0 * x2 + x2 * x2 / 5.0) + 0.5
    }
}

fn s1(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        x
    } else {
        let x2 = x * x;
        15.0 / 16.0 * x2 * (0.5 - x2 / 6.0 + x2 * x2 / 30.0) + 0.5 * x + 5.0 / 32.0
    }
}

fn s2(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        0.5 * (x * x + 1.0 / 7.0)
    } else {
        let x2 = x * x;
        15.0 / 16.0 * x * x2 * (1.0 / 6.0 - x2 / 30.0 + x2 * x2 / 210.0)
            + 0.25 * x2
            + 5.0 * x / 32.0
            + 1.0 / 28.0
    }
}

/// Terminal potential whose derivative is the saturated linear coupling
/// `−m/r` on `|m| ≤ r`, `−sign(m)` outside, optionally mollified by a
/// biweight bump of half-width `ρ` at the kinks `±r`.
///
/// The potential itself is the even primitive vanishing at 0:
/// `−m²/(2r)` inside and `r/2 − |m|` outside (for `ρ = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelarueTerminal {
    r: f64,
    rho: f64,
    offset: f64,
}

/// Builds the coupling with `r = r_δ = ∫_δ^T w_s^{-2} ds` from the drift `b`.
///
/// `rho = None` selects the default smoothing width `r_δ / 50`.
pub fn make_delarue_terminal(b: f64, horizon: f64, delta: f64, rho: Option<f64>) -> Result<DelarueTerminal> {
    if !(delta > 0.0 && delta < horizon) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, {horizon}), got {delta}"
        )));
    }
    let grid = TimeGrid::with_resolution(0.0, horizon, DEFAULT_STEPS_PER_UNIT)?;
    let r = delarue_riccati(b, &grid)?.r(delta)?;
    DelarueTerminal::new(r, rho.unwrap_or(r / 50.0))
}

impl DelarueTerminal {
    pub fn new(r: f64, rho: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold r must be positive, got {r}")));
        }
        if !(rho >= 0.0) || rho >= r {
            return Err(Error::InvalidParameter(format!(
                "smoothing width must lie in [0, r), got {rho}"
            )));
        }
        let mut p = Self { r, rho, offset: 0.0 };
        p.offset = -p.raw_value(0.0);
        Ok(p)
    }

    pub fn threshold(&self) -> f64 {
        self.r
    }

    pub fn smoothing(&self) -> f64 {
        self.rho
    }

    fn raw_value(&self, a: f64) -> f64 {
        if self.rho == 0.0 {
            if a <= self.r {
                -a * a / (2.0 * self.r)
            } else {
                0.5 * self.r - a
            }
        } else {
            let (p, q) = ((a + self.r) / self.rho, (a - self.r) / self.rho);
            a - self.rho * self.rho / self.r * (s2(p) - s2(q))
        }
    }

    /// Derivative for `a ≥ 0`.
    fn slope(&self, a: f64) -> f64 {
        // the kernel is symmetric, so mollification is exact off the bands
        if a <= self.r - self.rho || a >= self.r + self.rho {
            if a <= self.r {
                -a / self.r
            } else {
                -1.0
            }
        } else {
            let (p, q) = ((a + self.r) / self.rho, (a - self.r) / self.rho);
            1.0 - self.rho / self.r * (s1(p) - s1(q))
        }
    }

    /// Scalar derivative of the potential: the displayed coupling.
    pub fn d1(&self, m: f64) -> f64 {
        let v = self.slope(m.abs());
        if m < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn d2(&self, m: f64) -> Result<f64> {
        let a = m.abs();
        if self.rho == 0.0 && a == self.r {
            return Err(Error::KinkQuery { m });
        }
        if a < self.r - self.rho {
            return Ok(-1.0 / self.r);
        }
        if a > self.r + self.rho {
            return Ok(0.0);
        }
        let (p, q) = ((a + self.r) / self.rho, (a - self.r) / self.rho);
        Ok(-(s0(p) - s0(q)) / self.r)
    }
}

impl Potential for DelarueTerminal {
    fn name(&self) -> String {
        format!("delarue(r={},rho={})", self.r, self.rho)
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, m: &Vector) -> f64 {
        self.raw_value(m[0].abs()) + self.offset
    }

    fn gradient(&self, m: &Vector) -> Vector {
        Vector::from_element(1, self.d1(m[0]))
    }

    fn hessian(&self, m: &Vector) -> Result<Matrix> {
        Ok(Matrix::from_element(1, 1, self.d2(m[0])?))
    }

    fn bounds(&self) -> Bounds {
        let inv_r = 1.0 / self.r;
        let hess_lip = (self.rho > 0.0).then(|| inv_r * 15.0 / 16.0 / self.rho);
        Bounds {
            grad_sup: Some(1.0),
            grad_lip: Some(inv_r),
            hess_sup: Some(inv_r),
            hess_lip,
            hess_m_sup: Some((self.r + self.rho) * inv_r),
            hess_m_lip: hess_lip.map(|l| l * (self.r + self.rho) + inv_r),
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
    fn kernel_primitives_are_continuous() {
        for x in [-1.0, 1.0] {
            let e = 1e-12;
            assert!((s0(x - e) - s0(x + e)).abs() < 1e-9);
            assert!((s1(x - e) - s1(x + e)).abs() < 1e-9);
            assert!((s2(x - e) - s2(x + e)).abs() < 1e-9);
        }
        assert!((s0(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coupling_branches() {
        let g = make_delarue_terminal(0.0, 1.0, 0.1, None).unwrap();
        let r = g.threshold();
        assert_eq!(g.d1(0.0), 0.0);
        assert!((g.d1(0.5 * r) + 0.5).abs() < 1e-12);
        assert!((g.d1(-0.5 * r) - 0.5).abs() < 1e-12);
        assert!((g.d1(2.0 * r) + 1.0).abs() < 1e-12);
        assert_eq!(g.value(&Vector::from_element(1, 0.0)), 0.0);

        let sharp = make_delarue_terminal(0.0, 1.0, 0.1, Some(0.0)).unwrap();
        assert_eq!(sharp.d1(2.0 * r), -1.0);
        assert!(matches!(sharp.d2(r), Err(Error::KinkQuery { .. })));
        assert!(matches!(sharp.hessian(&Vector::from_element(1, -r)), Err(Error::KinkQuery { .. })));
        assert_eq!(sharp.d2(0.5 * r).unwrap(), -1.0 / r);
    }

    #[test]
    fn r_delta_closed_form_at_zero_drift() {
        let g = make_delarue_terminal(0.0, 1.0, 0.1, None).unwrap();
        let closed = (1.0 - (-1.8f64).exp()) / 2.0;
        assert!((g.threshold() - closed).abs() < 1e-6);
        assert!((g.smoothing() - closed / 50.0).abs() < 1e-7);
        assert!(make_delarue_terminal(0.0, 1.0, 1.0, None).is_err());
        assert!(make_delarue_terminal(0.0, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn mollified_matches_sharp_away_from_kinks() {
        let sharp = DelarueTerminal::new(0.4, 0.0).unwrap();
        let soft = DelarueTerminal::new(0.4, 0.008).unwrap();
        for &m in &[0.0, 0.1, 0.3, 0.5, 1.7, -0.2, -2.0] {
            let v = Vector::from_element(1, m);
            assert!((sharp.d1(m) - soft.d1(m)).abs() < 1e-12);
            // potentials differ by the constant ρ²/(14 r) shift outside
            assert!((sharp.value(&v) - soft.value(&v)).abs() < 2e-5);
        }
        for i in 0..=400 {
            let m = -1.0 + 0.005 * i as f64;
            assert!(soft.d1(m).abs() <= 1.0 + 1e-15);
            assert!(soft.d2(m).unwrap().abs() <= 1.0 / 0.4 + 1e-12);
        }
    }
}
