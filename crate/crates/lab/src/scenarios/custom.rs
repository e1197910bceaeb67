use mfselect_core::numerics::stats;

use super::common::{first_components, moments, new_row, players_ensemble, signs, sweep_n};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::Row;
use crate::LabError;

pub const COLUMNS: [&str; 12] = [
    "pos_freq", "band_lo", "band_hi", "mean_mT", "var_mT", "se_mean_mT", "exit_fraction", "cost_mean", "cost_se",
    "kuiper_v", "kuiper_p", "median_r",
];

/// Generic statistics of the `N`-player mean without verdicts.
pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let spec = cfg.spec()?;
    let mut row = new_row(cfg, plan);
    let e = players_ensemble(cfg, &spec, sweep_n(plan), plan)?;
    signs(&mut row, cfg, &first_components(&e));
    moments(&mut row, &e);
    if spec.dim() == 2 {
        let t = e.terminals();
        let angles: Vec<f64> = t.iter().map(|m| m[1].atan2(m[0])).collect();
        let radii: Vec<f64> = t.iter().map(|m| m[0].hypot(m[1])).collect();
        let k = stats::circular_uniformity(&angles)?;
        row.set("kuiper_v", k.statistic)
            .set("kuiper_p", k.p_value)
            .set("median_r", stats::median(&radii));
    }
    Ok(row)
}
