use mfselect_core::control::{differentiability_probe, value_gradient_fd, ShootingOptions, Verdict as Probe, DEFAULT_PROBE_STEP};
use mfselect_core::meanfield::FieldProblem;
use mfselect_core::numerics::Vector;

use super::common::{field, flag, fmt_series, new_row, sweep_n, sweep_series, trend_verdict};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 8] = [
    "u_field", "fd_gradient", "gap", "differentiable", "u_origin", "left_slope", "right_slope", "kink",
];

pub fn check(_cfg: &ScenarioConfig) -> Result<(), LabError> {
    Ok(())
}

fn sweep_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec_at(cfg.thresholds.probe)?;
    let d = spec.dim();
    let mut row = new_row(cfg, plan);
    let opts = ShootingOptions::default();
    let f = field(cfg, &spec, FieldProblem::players(&spec, sweep_n(plan))?)?;
    let u = f.eval_vec(0.0, &spec.nu0);
    let fd = value_gradient_fd(&spec, 0.0, &spec.nu0, DEFAULT_PROBE_STEP, &opts)?;
    let probe = differentiability_probe(&spec, 0.0, &spec.nu0, DEFAULT_PROBE_STEP, &opts)?;
    let origin = f.eval_vec(0.0, &Vector::zeros(d));
    row.set("u_field", u[0])
        .set("fd_gradient", fd[0])
        .set("gap", (u - fd).norm())
        .set("differentiable", flag(probe.verdict == Probe::Differentiable))
        .set("u_origin", origin.amax());
    Ok(row)
}

/// One-sided slopes of the value function at the origin.
fn kink_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec_at(0.0)?;
    let mut row = new_row(cfg, plan);
    let probe = differentiability_probe(&spec, 0.0, &spec.nu0, DEFAULT_PROBE_STEP, &ShootingOptions::default())?;
    row.set("left_slope", probe.left[0])
        .set("right_slope", probe.right[0])
        .set("kink", flag(probe.verdict == Probe::Kink));
    Ok(row)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    if plan.label == "kink" {
        kink_row(cfg, plan)
    } else {
        sweep_row(cfg, plan)
    }
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let th = &cfg.thresholds;
    let mut v = Vec::new();
    let mut notes = Vec::new();
    let at_kink = rows.iter().any(|r| r.param.is_some() && r.get("differentiable") == Some(0.0));
    if at_kink {
        notes.push(format!(
            "probe point {} is a kink of the value function; the convergence verdict was skipped",
            th.probe
        ));
    } else {
        v.push(trend_verdict("gap decreasing in N", rows, "gap", &th.trend_n));
        if let Some(&(n, gap)) = sweep_series(rows, "gap").last() {
            v.push(Verdict::new(
                "gap at largest N",
                gap < th.gap_tolerance,
                format!("N={n}: {gap:.4e} < {:.1e}", th.gap_tolerance),
            ));
        }
    }
    if cfg.spec().map(|s| s.is_even()).unwrap_or(false) {
        let origin = sweep_series(rows, "u_origin");
        v.push(Verdict::new(
            "field vanishes at the origin",
            !origin.is_empty() && origin.iter().all(|(_, u)| *u == 0.0),
            fmt_series(&origin),
        ));
    }
    if let Some(r) = rows.iter().find(|r| r.label == "kink") {
        if r.get("kink") == Some(1.0) {
            notes.push(format!(
                "value function has a kink at the origin: one-sided slopes {:.5} and {:.5}; the field value 0 there matches neither",
                r.get("left_slope").unwrap_or(f64::NAN),
                r.get("right_slope").unwrap_or(f64::NAN)
            ));
        }
    }
    (v, notes)
}
