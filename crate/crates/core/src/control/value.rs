use super::descent::{descent_value, DescentOptions};
use super::shooting::{default_start_lattice, enumerate_stationary, ShootingOptions, StationarySet};
use crate::numerics::Vector;
use crate::potentials::ModelSpec;
use crate::Result;

/// Relative agreement required between the shooting value and the descent
/// cross-check, measured as `|Δ| ≤ tol · (1 + |v|)`.
pub const VALUE_AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct ValueReport {
    pub value: f64,
    pub descent: Option<f64>,
    /// Set when the descent cross-check disagrees beyond tolerance.
    pub warning: Option<String>,
    pub stationary: StationarySet,
}

impl ValueReport {
    pub fn consistent(&self) -> bool {
        self.warning.is_none()
    }
}

/// `v(t0, ν0)` as the least cost over the enumerated stationary points.
pub fn value_shooting(spec: &ModelSpec, t0: f64, nu0: &Vector, opts: &ShootingOptions) -> Result<f64> {
    let starts = default_start_lattice(spec, t0, nu0);
    Ok(enumerate_stationary(spec, t0, nu0, &starts, opts)?.min_cost)
}

/// `v(t0, ν0)` from shooting, cross-checked by descent on discretized
/// controls (skipped at `t0 = T`).
pub fn value_function(
    spec: &ModelSpec,
    t0: f64,
    nu0: &Vector,
    opts: &ShootingOptions,
    descent: &DescentOptions,
) -> Result<ValueReport> {
    let starts = default_start_lattice(spec, t0, nu0);
    let stationary = enumerate_stationary(spec, t0, nu0, &starts, opts)?;
    let value = stationary.min_cost;
    if t0 >= spec.horizon {
        return Ok(ValueReport { value, descent: None, warning: None, stationary });
    }
    let check = descent_value(spec, t0, nu0, descent)?.value;
    let gap = (check - value).abs();
    let warning = (gap > VALUE_AGREEMENT_TOL * (1.0 + value.abs())).then(|| {
        format!("value cross-check disagrees: shooting {value:.8}, descent {check:.8}")
    });
    Ok(ValueReport { value, descent: Some(check), warning, stationary })
}
