use mfselect_core::control::Classification;
use mfselect_core::numerics::{delarue_riccati, TimeGrid, DEFAULT_STEPS_PER_UNIT};
use mfselect_core::potentials::ModelFamily;

use super::common::{flag, is_origin, new_row, origin_solution, sign_band_verdicts, stationary, upper_terminal};
use super::symmetric::{minimizer_notes, selection_row};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 19] = [
    "pos_freq", "band_lo", "band_hi", "w1", "target", "minimizers", "mean_mT", "var_mT", "se_mean_mT", "exit_fraction",
    "cost_mean", "cost_se", "err_plus", "err_minus", "closed_terminal", "stationary_points", "middle_present",
    "middle_stationary_only", "middle_cost_gap",
];

pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    let spec = cfg.spec()?;
    if !matches!(cfg.family()?, ModelFamily::Delarue { .. }) || !is_origin(&spec.nu0) {
        return Err(LabError::Config(format!("E3 needs the delarue model started at 0, got {}", spec.name)));
    }
    Ok(())
}

/// Shooting trajectories against `±w_t ∫_0^t w_s^{-2} ds` and the middle
/// equilibrium at the origin.
fn shooting_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let grid = TimeGrid::with_resolution(0.0, spec.horizon, DEFAULT_STEPS_PER_UNIT)?;
    let curves = delarue_riccati(cfg.model.drift, &grid)?;
    let closed = |t: f64| curves.w_at(t) * curves.integral_to(t);
    let set = stationary(&spec)?;

    let (mut err_plus, mut err_minus) = (f64::NAN, f64::NAN);
    for s in set.minimizers() {
        let sign = s.terminal()[0].signum();
        let err = s
            .times
            .iter()
            .zip(&s.m)
            .map(|(&t, m)| (m[0] - sign * closed(t)).abs())
            .fold(0.0, f64::max);
        let slot = if sign > 0.0 { &mut err_plus } else { &mut err_minus };
        *slot = if slot.is_nan() { err } else { slot.min(err) };
    }
    row.set("err_plus", err_plus)
        .set("err_minus", err_minus)
        .set("closed_terminal", closed(spec.horizon))
        .set("target", upper_terminal(&set))
        .set("minimizers", set.multiplicity as f64)
        .set("stationary_points", set.solutions.len() as f64);
    match origin_solution(&set) {
        Some(s) => {
            row.set("middle_present", 1.0)
                .set("middle_stationary_only", flag(s.classification == Classification::StationaryOnly))
                .set("middle_cost_gap", s.cost - set.min_cost);
        }
        None => {
            row.set("middle_present", 0.0);
        }
    }
    Ok(row)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    if plan.label == "shooting" {
        shooting_row(cfg, plan)
    } else {
        selection_row(cfg, plan)
    }
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let mut v = Vec::new();
    if let Some(r) = rows.iter().find(|r| r.label == "shooting") {
        let (p, m) = (r.get("err_plus").unwrap_or(f64::NAN), r.get("err_minus").unwrap_or(f64::NAN));
        let tol = cfg.thresholds.closed_form_error;
        v.push(Verdict::new(
            "closed-form trajectories",
            p < tol && m < tol,
            format!("max error + {p:.3e}, - {m:.3e} < {tol:.1e}"),
        ));
        let present = r.get("middle_present") == Some(1.0);
        let only = r.get("middle_stationary_only") == Some(1.0);
        let gap = r.get("middle_cost_gap").unwrap_or(f64::NAN);
        v.push(Verdict::new(
            "middle equilibrium not selected",
            present && only && gap > 0.0,
            format!("present {present}, stationary-only {only}, cost gap {gap:.4e}"),
        ));
    }
    v.extend(sign_band_verdicts(rows));
    (v, minimizer_notes(rows))
}
