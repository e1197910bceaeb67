//! Deterministic control of the mean: Pontryagin shooting, enumeration of
//! stationary points, the value function with an independent descent
//! cross-check, a differentiability probe and the constant-control
//! reduction for driftless, control-only models.

mod descent;
mod probe;
mod reduction;
mod shooting;

pub use descent::{descent_value, DescentOptions, DescentOutcome, DiscreteControl};
pub use probe::{differentiability_probe, value_gradient_fd, ProbeResult, Verdict, DEFAULT_PROBE_STEP};
pub use reduction::{static_minimize, static_u, StaticMinimum, StaticMinimizers};
pub use shooting::{
    default_start_lattice, enumerate_stationary, shoot, start_lattice, Classification, OCSolution,
    ShootingOptions, StationarySet,
};

mod value;
pub use value::{value_function, value_shooting, ValueReport, VALUE_AGREEMENT_TOL};
