//! Decoupling field of the mean's control problem, its closed-form
//! quadratic oracle, and Monte Carlo simulation of the mean process.

mod field;
pub mod io;
mod oracle;
mod simulate;

pub use field::{
    solve_field, solve_field_eps, solve_field_n, stable_time_grid, transport_bound, DecouplingField, FieldKind,
    FieldProblem, FieldSetup,
};
pub use oracle::{oracle_error, riccati_field_oracle, OracleError, RiccatiField};
pub use simulate::{
    simulate, NoiseModel, NoiseTransform, PathEnsemble, Policy, SamplePath, SimulationOptions,
};
