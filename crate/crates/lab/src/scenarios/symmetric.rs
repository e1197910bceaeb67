use mfselect_core::numerics::stats::{wasserstein1_1d, DiscreteLaw};

use super::common::{
    first_components, is_origin, moments, new_row, players_ensemble, sign_band_verdicts, signs, stationary, sweep_n,
    trend_verdict, upper_terminal,
};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 12] = [
    "pos_freq", "band_lo", "band_hi", "w1", "target", "minimizers", "mean_mT", "var_mT", "se_mean_mT", "exit_fraction",
    "cost_mean", "cost_se",
];

pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    let spec = cfg.spec()?;
    if spec.dim() != 1 || !spec.is_even() || !is_origin(&spec.nu0) {
        return Err(LabError::Config(format!(
            "{} needs an even one-dimensional model started at 0, got {}",
            cfg.scenario.id, spec.name
        )));
    }
    Ok(())
}

/// Sign statistics and W1 to the symmetric pair of minimizer terminals.
pub(super) fn selection_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let set = stationary(&spec)?;
    let target = upper_terminal(&set);
    let e = players_ensemble(cfg, &spec, sweep_n(plan), plan)?;
    let x = first_components(&e);
    signs(&mut row, cfg, &x);
    let w1 = wasserstein1_1d(&DiscreteLaw::empirical(&x)?, &DiscreteLaw::symmetric_pair(target));
    row.set("w1", w1)
        .set("target", target)
        .set("minimizers", set.multiplicity as f64);
    moments(&mut row, &e);
    Ok(row)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    selection_row(cfg, plan)
}

pub(super) fn minimizer_notes(rows: &[Row]) -> Vec<String> {
    rows.iter()
        .filter_map(|r| r.get("minimizers").filter(|m| *m != 2.0).map(|m| format!("{}: {m} minimizers instead of 2", r.label)))
        .collect()
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let mut v = sign_band_verdicts(rows);
    v.push(trend_verdict("W1 decreasing in N", rows, "w1", &cfg.thresholds.trend_n));
    (v, minimizer_notes(rows))
}
