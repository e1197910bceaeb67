use mfselect_core::control::Classification;
use mfselect_core::meanfield::{simulate, FieldProblem, NoiseModel, NoiseTransform, Policy, SimulationOptions};
use mfselect_core::numerics::stats;
use mfselect_core::potentials::ModelFamily;

use super::common::{field, flag, is_origin, new_row, origin_solution, players_ensemble, sim_options, stationary, sweep_n, upper_terminal};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 13] = [
    "kuiper_v", "kuiper_p", "median_r", "mean_r", "target_r", "exit_fraction", "cost_mean", "cost_se",
    "stationary_points", "middle_present", "middle_stationary_only", "middle_cost_gap", "rotation_bitwise",
];

/// Paths in the rotation sanity check.
const ROTATION_PATHS: usize = 16;

fn kappa(cfg: &ScenarioConfig) -> Result<f64, LabError> {
    match cfg.family()? {
        ModelFamily::RadialLogCosh { kappa, dim: 2 } => Ok(kappa),
        other => Err(LabError::Config(format!("E4 needs radial_logcosh(kappa,2), got {other}"))),
    }
}

pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    kappa(cfg)?;
    if !is_origin(&cfg.spec()?.nu0) {
        return Err(LabError::Config("E4 starts at the origin".into()));
    }
    Ok(())
}

/// Terminal radius of the minimizers: the one-dimensional log-cosh problem
/// along any ray.
fn target_radius(cfg: &ScenarioConfig) -> Result<f64, LabError> {
    let opts = cfg.model_options()?;
    let spec = ModelFamily::LogCosh { kappa: kappa(cfg)? }.build(&opts)?;
    Ok(upper_terminal(&stationary(&spec)?))
}

fn sweep_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let e = players_ensemble(cfg, &spec, sweep_n(plan), plan)?;
    let terminals = e.terminals();
    let angles: Vec<f64> = terminals.iter().map(|m| m[1].atan2(m[0])).collect();
    let radii: Vec<f64> = terminals.iter().map(|m| m[0].hypot(m[1])).collect();
    let k = stats::circular_uniformity(&angles)?;
    let (c, se) = e.mean_cost();
    row.set("kuiper_v", k.statistic)
        .set("kuiper_p", k.p_value)
        .set("median_r", stats::median(&radii))
        .set("mean_r", stats::mean(&radii))
        .set("target_r", target_radius(cfg)?)
        .set("exit_fraction", e.clamped_fraction())
        .set("cost_mean", c)
        .set("cost_se", se);
    Ok(row)
}

fn equilibria_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let set = stationary(&spec)?;
    row.set("stationary_points", set.solutions.len() as f64)
        .set("target_r", target_radius(cfg)?);
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

/// Rotating every Gaussian input by a quarter turn must rotate the whole
/// ensemble bit for bit.
fn rotation_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let n = cfg.sweep.n[0];
    let f = field(cfg, &spec, FieldProblem::players(&spec, n)?)?;
    let base = SimulationOptions { paths: ROTATION_PATHS, ..sim_options(cfg, plan) };
    let rot = SimulationOptions { transform: NoiseTransform::Rotate90, ..base };
    let a = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(n), 0.0, &base)?;
    let b = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(n), 0.0, &rot)?;
    let exact = a.paths.iter().zip(&b.paths).all(|(pa, pb)| {
        pa.m.chunks(2)
            .zip(pb.m.chunks(2))
            .all(|(x, y)| y[0] == -x[1] && y[1] == x[0])
            && pa.cost == pb.cost
    });
    row.set("rotation_bitwise", flag(exact));
    Ok(row)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    match plan.label.as_str() {
        "equilibria" => equilibria_row(cfg, plan),
        "rotation" => rotation_row(cfg, plan),
        _ => sweep_row(cfg, plan),
    }
}

fn applies(at: usize, row: &Row) -> bool {
    row.param.is_some() && (at == 0 || row.param == Some(at as f64))
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let th = &cfg.thresholds;
    let mut v = Vec::new();
    let mut notes = Vec::new();
    for r in rows.iter().filter(|r| applies(th.kuiper_n, r)) {
        let p = r.get("kuiper_p").unwrap_or(f64::NAN);
        v.push(Verdict::new(
            format!("angle uniformity {}", r.label),
            p > th.kuiper_alpha,
            format!("Kuiper p {p:.4} > {}", th.kuiper_alpha),
        ));
    }
    for r in rows.iter().filter(|r| applies(th.radius_n, r)) {
        let (med, target) = (r.get("median_r").unwrap_or(f64::NAN), r.get("target_r").unwrap_or(f64::NAN));
        v.push(Verdict::new(
            format!("median radius {}", r.label),
            (med - target).abs() <= th.radius_tolerance,
            format!("median {med:.4} vs {target:.4} +- {}", th.radius_tolerance),
        ));
    }
    for n in [th.kuiper_n, th.radius_n] {
        if n != 0 && !rows.iter().any(|r| r.param == Some(n as f64)) {
            notes.push(format!("N={n} is not in the sweep; its check was skipped"));
        }
    }
    if let Some(r) = rows.iter().find(|r| r.label == "equilibria") {
        let present = r.get("middle_present") == Some(1.0);
        let only = r.get("middle_stationary_only") == Some(1.0);
        let gap = r.get("middle_cost_gap").unwrap_or(f64::NAN);
        v.push(Verdict::new(
            "origin equilibrium not selected",
            present && only && gap > 0.0,
            format!("present {present}, stationary-only {only}, cost gap {gap:.4e}"),
        ));
    }
    if let Some(r) = rows.iter().find(|r| r.label == "rotation") {
        v.push(Verdict::new(
            "quarter-turn equivariance",
            r.get("rotation_bitwise") == Some(1.0),
            "rotated inputs give the rotated ensemble bitwise",
        ));
    }
    (v, notes)
}
