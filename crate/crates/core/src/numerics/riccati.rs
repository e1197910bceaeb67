use super::ode::rk4_step;
use super::{check_finite_matrix, symmetrize, Matrix, TimeGrid, Vector};
use crate::{Error, Result};

/// Norm above which a backward Riccati sweep is treated as escaping.
const ESCAPE_NORM: f64 = 1e12;

/// Solves `φ' = φ² − φ b − bᵀ φ − Q_run` backward from `φ_T = Q_term`.
///
/// The iterate is symmetrized after every step. Returned matrices are in
/// increasing time order, one per grid node.
pub fn riccati_backward(b: &Matrix, q_run: &Matrix, q_term: &Matrix, grid: &TimeGrid) -> Result<Vec<Matrix>> {
    check_finite_matrix("b", b)?;
    check_finite_matrix("Q_run", q_run)?;
    check_finite_matrix("Q_term", q_term)?;
    let d = b.nrows();
    for (name, m) in [("b", b), ("Q_run", q_run), ("Q_term", q_term)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::InvalidInput(format!("{name} must be {d}x{d}")));
        }
    }
    for (name, m) in [("Q_run", q_run), ("Q_term", q_term)] {
        if (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
            return Err(Error::InvalidInput(format!("{name} must be symmetric")));
        }
    }

    let bt = b.transpose();
    let rhs = |_t: f64, x: &Vector| {
        let phi = Matrix::from_column_slice(d, d, x.as_slice());
        let dphi = &phi * &phi - &phi * b - &bt * &phi - q_run;
        Vector::from_column_slice(dphi.as_slice())
    };

    let n = grid.nodes();
    let mut out = vec![Matrix::zeros(d, d); n];
    let mut phi = symmetrize(q_term);
    out[n - 1] = phi.clone();
    let h = -grid.dt();
    for k in (0..n - 1).rev() {
        let x = Vector::from_column_slice(phi.as_slice());
        let next = rk4_step(&rhs, grid.time(k + 1), &x, h);
        phi = symmetrize(&Matrix::from_column_slice(d, d, next.as_slice()));
        if phi.iter().any(|v| !v.is_finite()) || phi.amax() > ESCAPE_NORM {
            return Err(Error::RiccatiEscape { t: grid.time(k) });
        }
        out[k] = phi.clone();
    }
    Ok(out)
}

/// Scalar curves of the two-equilibria example with a piecewise-linear
/// terminal coupling: the Riccati coefficient `η` (`η' = η² − 2bη − 1`,
/// `η_T = 1`), the weight `w_t = exp ∫_t^T (−b + η_s) ds` and the running
/// integral `∫_0^t w_s^{-2} ds`, all sampled on one grid.
#[derive(Debug, Clone)]
pub struct DelarueCurves {
    pub grid: TimeGrid,
    pub eta: Vec<f64>,
    pub w: Vec<f64>,
    /// `∫_{t0}^{t_k} w_s^{-2} ds` by the trapezoid rule.
    pub cum_inv_w2: Vec<f64>,
}

impl DelarueCurves {
    fn interp(&self, values: &[f64], t: f64) -> f64 {
        let (k, w) = self.grid.locate(t);
        (1.0 - w) * values[k] + w * values[k + 1]
    }

    pub fn w_at(&self, t: f64) -> f64 {
        self.interp(&self.w, t)
    }

    /// `∫_{t0}^{t} w_s^{-2} ds`, exact trapezoid on grid nodes and linear
    /// in between.
    pub fn integral_to(&self, t: f64) -> f64 {
        self.interp(&self.cum_inv_w2, t)
    }

    /// `r_δ = ∫_δ^T w_s^{-2} ds`.
    pub fn r(&self, delta: f64) -> Result<f64> {
        if !(delta > self.grid.t0() && delta < self.grid.t1()) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in ({}, {}), got {delta}",
                self.grid.t0(),
                self.grid.t1()
            )));
        }
        Ok(self.cum_inv_w2[self.cum_inv_w2.len() - 1] - self.integral_to(delta))
    }

    /// The positive optimal trajectory `w_t ∫_0^t w_s^{-2} ds`.
    pub fn upper_trajectory(&self) -> Vec<f64> {
        self.w.iter().zip(&self.cum_inv_w2).map(|(w, c)| w * c).collect()
    }
}

pub fn delarue_riccati(b: f64, grid: &TimeGrid) -> Result<DelarueCurves> {
    let bm = Matrix::from_element(1, 1, b);
    let one = Matrix::from_element(1, 1, 1.0);
    let eta: Vec<f64> = riccati_backward(&bm, &one, &one, grid)?
        .into_iter()
        .map(|m| m[(0, 0)])
        .collect();
    let n = grid.nodes();
    let h = grid.dt();

    // log w_t = ∫_t^T (−b + η), accumulated from T downwards
    let mut log_w = vec![0.0; n];
    for k in (0..n - 1).rev() {
        log_w[k] = log_w[k + 1] + 0.5 * h * ((-b + eta[k]) + (-b + eta[k + 1]));
    }
    let w: Vec<f64> = log_w.iter().map(|l| l.exp()).collect();

    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + 0.5 * h * (w[k - 1].powi(-2) + w[k].powi(-2));
    }
    Ok(DelarueCurves {
        grid: *grid,
        eta,
        w,
        cum_inv_w2: cum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn stationary_scalar_case() {
        let g = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let phi = riccati_backward(&scalar(0.0), &scalar(1.0), &scalar(1.0), &g).unwrap();
        assert!(phi.iter().all(|p| (p[(0, 0)] - 1.0).abs() < 1e-14));
    }

    #[test]
    fn identity_data_stays_identity_in_2d() {
        let g = TimeGrid::new(0.0, 3.0, 300).unwrap();
        let id = Matrix::identity(2, 2);
        let phi = riccati_backward(&Matrix::zeros(2, 2), &id, &id, &g).unwrap();
        for p in &phi {
            assert!((p - &id).amax() < 1e-10);
            assert_eq!((p - p.transpose()).amax(), 0.0);
        }
    }

    #[test]
    fn scalar_case_matches_coth_closed_form_and_fine_reference() {
        // φ' = φ² − 1, φ_T = 2  ⇒  φ_t = coth(T − t + atanh(1/2))
        let g = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let fine = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let phi = riccati_backward(&scalar(0.0), &scalar(1.0), &scalar(2.0), &g).unwrap();
        let reference = riccati_backward(&scalar(0.0), &scalar(1.0), &scalar(2.0), &fine).unwrap();
        let c = 0.5f64.atanh();
        for k in 0..g.nodes() {
            let s = 1.0 - g.time(k) + c;
            let exact = s.cosh() / s.sinh();
            assert!((phi[k][(0, 0)] - exact).abs() < 1e-8);
            assert!((phi[k][(0, 0)] - reference[10 * k][(0, 0)]).abs() < 1e-8);
        }
    }

    #[test]
    fn escape_is_reported() {
        // φ' = φ² with φ_T = −1 runs off to −∞ at T − 1
        let g = TimeGrid::new(0.0, 2.0, 2000).unwrap();
        let err = riccati_backward(&scalar(0.0), &scalar(0.0), &scalar(-1.0), &g).unwrap_err();
        assert!(matches!(err, Error::RiccatiEscape { t } if t > 0.9 && t < 1.0));
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let g = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let q = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(riccati_backward(&Matrix::zeros(2, 2), &q, &q, &g).is_err());
    }

    #[test]
    fn delarue_curves_at_zero_drift() {
        let t = 1.0;
        let g = TimeGrid::new(0.0, t, 1000).unwrap();
        let c = delarue_riccati(0.0, &g).unwrap();
        assert_eq!(c.w[c.w.len() - 1], 1.0);
        for k in (0..g.nodes()).step_by(97) {
            assert!((c.eta[k] - 1.0).abs() < 1e-12);
            assert!((c.w[k] - (t - g.time(k)).exp()).abs() < 1e-9);
        }
        let delta = 0.1;
        let closed = (1.0 - (-2.0 * (t - delta)).exp()) / 2.0;
        assert!((c.r(delta).unwrap() - closed).abs() < 1e-6);
        // δ → 0 limit
        let r0 = c.cum_inv_w2[c.cum_inv_w2.len() - 1];
        assert!((r0 - 0.432_332_358).abs() < 1e-6);
        assert!(c.r(0.0).is_err());
        assert!(c.r(1.0).is_err());
    }

    #[test]
    fn delarue_terminal_weight_is_one_for_any_drift() {
        let g = TimeGrid::new(0.0, 2.0, 500).unwrap();
        for b in [-1.0, 0.3, 2.0] {
            let c = delarue_riccati(b, &g).unwrap();
            assert_eq!(*c.w.last().unwrap(), 1.0);
            assert_eq!(*c.eta.last().unwrap(), 1.0);
        }
    }
}
