//! Scenario drivers. Every scenario is a list of independent rows, each
//! computed from the configuration and its row index alone, so any row can
//! be recomputed in isolation. Verdicts are a pure function of the rows.

mod common;
mod convergence;
mod custom;
mod delarue;
mod eps;
mod field_gap;
mod sphere;
mod symmetric;

use rayon::prelude::*;

use crate::config::{ScenarioConfig, ScenarioId};
use crate::report::{Row, ScenarioReport, Verdict};
use crate::LabError;

pub use common::{setup as field_setup, stream_offset};

/// A row to be computed: its label, sweep value and position.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPlan {
    pub index: usize,
    pub label: String,
    pub param: Option<f64>,
}

impl RowPlan {
    fn sweep(index: usize, name: &str, value: f64) -> Self {
        Self { index, label: format!("{name}={value}"), param: Some(value) }
    }

    fn named(index: usize, label: &str) -> Self {
        Self { index, label: label.to_string(), param: None }
    }
}

/// Fixed CSV metric columns of a scenario, in order.
pub fn columns(id: ScenarioId) -> Vec<&'static str> {
    match id {
        ScenarioId::E1 => convergence::COLUMNS.to_vec(),
        ScenarioId::E2 => symmetric::COLUMNS.to_vec(),
        ScenarioId::E3 => delarue::COLUMNS.to_vec(),
        ScenarioId::E4 => sphere::COLUMNS.to_vec(),
        ScenarioId::E5 => eps::COLUMNS.to_vec(),
        ScenarioId::E6 => field_gap::COLUMNS.to_vec(),
        ScenarioId::Custom => custom::COLUMNS.to_vec(),
    }
}

/// Checks scenario preconditions that go beyond the config schema.
pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    match cfg.scenario.id {
        ScenarioId::E1 => convergence::check(cfg),
        ScenarioId::E2 => symmetric::check(cfg),
        ScenarioId::E3 => delarue::check(cfg),
        ScenarioId::E4 => sphere::check(cfg),
        ScenarioId::E5 => eps::check(cfg),
        ScenarioId::E6 => field_gap::check(cfg),
        ScenarioId::Custom => Ok(()),
    }
}

pub fn plan(cfg: &ScenarioConfig) -> Vec<RowPlan> {
    let mut rows: Vec<RowPlan> = if cfg.scenario.id.uses_eps() {
        cfg.sweep.eps.iter().enumerate().map(|(i, &e)| RowPlan::sweep(i, "eps", e)).collect()
    } else {
        cfg.sweep.n.iter().enumerate().map(|(i, &n)| RowPlan::sweep(i, "N", n as f64)).collect()
    };
    let extra: &[&str] = match cfg.scenario.id {
        ScenarioId::E1 if cfg.thresholds.symmetry_check => &["N=inf", "symmetric"],
        ScenarioId::E1 => &["N=inf"],
        ScenarioId::E3 => &["shooting"],
        ScenarioId::E4 => &["equilibria", "rotation"],
        ScenarioId::E6 => &["kink"],
        _ => &[],
    };
    let base = rows.len();
    rows.extend(extra.iter().enumerate().map(|(i, l)| RowPlan::named(base + i, l)));
    rows
}

pub fn compute_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    match cfg.scenario.id {
        ScenarioId::E1 => convergence::row(cfg, plan),
        ScenarioId::E2 => symmetric::row(cfg, plan),
        ScenarioId::E3 => delarue::row(cfg, plan),
        ScenarioId::E4 => sphere::row(cfg, plan),
        ScenarioId::E5 => eps::row(cfg, plan),
        ScenarioId::E6 => field_gap::row(cfg, plan),
        ScenarioId::Custom => custom::row(cfg, plan),
    }
}

/// Pure verdict logic: the same rows and thresholds always give the same
/// verdicts and notes.
pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let (verdicts, mut notes) = match cfg.scenario.id {
        ScenarioId::E1 => convergence::evaluate(cfg, rows),
        ScenarioId::E2 => symmetric::evaluate(cfg, rows),
        ScenarioId::E3 => delarue::evaluate(cfg, rows),
        ScenarioId::E4 => sphere::evaluate(cfg, rows),
        ScenarioId::E5 => eps::evaluate(cfg, rows),
        ScenarioId::E6 => field_gap::evaluate(cfg, rows),
        ScenarioId::Custom => (Vec::new(), Vec::new()),
    };
    for r in rows {
        if let Some(f) = r.get("exit_fraction").filter(|f| *f > 0.01) {
            notes.push(format!("{}: {:.1}% of paths were clamped to the field box", r.label, 100.0 * f));
        }
    }
    (verdicts, notes)
}

/// Runs every row (sweep values in parallel) and assembles the report in
/// plan order.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioReport, LabError> {
    cfg.validate()?;
    check(cfg)?;
    let plans = plan(cfg);
    let rows = plans
        .par_iter()
        .map(|p| compute_row(cfg, p))
        .collect::<Result<Vec<Row>, LabError>>()?;
    let (verdicts, notes) = evaluate(cfg, &rows);
    Ok(ScenarioReport {
        scenario: cfg.scenario.id,
        config_hash: cfg.hash_hex(),
        columns: columns(cfg.scenario.id),
        rows,
        verdicts,
        notes,
    })
}

/// Key metric plotted against the sweep value.
pub fn plot_metric(id: ScenarioId) -> &'static str {
    match id {
        ScenarioId::E1 => "sup_mean_error",
        ScenarioId::E2 | ScenarioId::E3 => "w1",
        ScenarioId::E4 => "kuiper_p",
        ScenarioId::E5 => "var_mT_off",
        ScenarioId::E6 => "gap",
        ScenarioId::Custom => "var_mT",
    }
}
