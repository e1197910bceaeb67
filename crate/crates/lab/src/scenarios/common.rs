use mfselect_core::control::{default_start_lattice, enumerate_stationary, ShootingOptions, StationarySet};
use mfselect_core::meanfield::{
    simulate, DecouplingField, FieldProblem, FieldSetup, NoiseModel, PathEnsemble, Policy, SimulationOptions,
};
use mfselect_core::numerics::{stats, Vector};
use mfselect_core::potentials::ModelSpec;

use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

/// First RNG stream of row `index`; rows own disjoint ranges of 2³² streams.
pub fn stream_offset(index: usize) -> u64 {
    (index as u64) << 32
}

pub(super) fn new_row(cfg: &ScenarioConfig, plan: &RowPlan) -> Row {
    Row::new(plan.label.clone(), plan.param, cfg.scenario.seed, stream_offset(plan.index))
}

pub(super) fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn setup(cfg: &ScenarioConfig) -> FieldSetup {
    FieldSetup {
        half_width: cfg.grid.half_width,
        spacing: cfg.grid.spacing,
        max_stored_levels: cfg.grid.max_levels,
        ..Default::default()
    }
}

pub(super) fn field(cfg: &ScenarioConfig, spec: &ModelSpec, problem: FieldProblem) -> Result<DecouplingField, LabError> {
    Ok(setup(cfg).solve(spec, problem)?)
}

pub(super) fn sim_options(cfg: &ScenarioConfig, plan: &RowPlan) -> SimulationOptions {
    SimulationOptions {
        paths: cfg.scenario.paths,
        steps: cfg.simulation.steps,
        seed: cfg.scenario.seed,
        stream_offset: stream_offset(plan.index),
        record_every: cfg.simulation.record_every,
        ..Default::default()
    }
}

/// Empirical mean of `n` players under the `N`-player decoupling field.
pub(super) fn players_ensemble(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    n: usize,
    plan: &RowPlan,
) -> Result<PathEnsemble, LabError> {
    let f = field(cfg, spec, FieldProblem::players(spec, n)?)?;
    Ok(simulate(spec, &Policy::Feedback(&f), NoiseModel::Players(n), 0.0, &sim_options(cfg, plan))?)
}

pub(super) fn sweep_n(plan: &RowPlan) -> usize {
    plan.param.expect("sweep row") as usize
}

pub(super) fn first_components(e: &PathEnsemble) -> Vec<f64> {
    (0..e.paths.len()).map(|p| e.terminal(p)[0]).collect()
}

/// Mean, variance and standard error of the first terminal component, the
/// clamped fraction and the cost estimate.
pub(super) fn moments(row: &mut Row, e: &PathEnsemble) {
    let x = first_components(e);
    let var = stats::variance(&x);
    row.set("mean_mT", stats::mean(&x))
        .set("var_mT", var)
        .set("se_mean_mT", (var / x.len() as f64).sqrt())
        .set("exit_fraction", e.clamped_fraction());
    let (c, se) = e.mean_cost();
    row.set("cost_mean", c).set("cost_se", se);
}

/// Frequency of a positive first terminal component and its band around ½.
pub(super) fn signs(row: &mut Row, cfg: &ScenarioConfig, x: &[f64]) {
    let pos = x.iter().filter(|v| **v > 0.0).count() as f64 / x.len() as f64;
    let (lo, hi) = stats::binomial_band(0.5, x.len(), cfg.thresholds.band_sigmas);
    row.set("pos_freq", pos).set("band_lo", lo).set("band_hi", hi);
}

pub(super) fn stationary(spec: &ModelSpec) -> Result<StationarySet, LabError> {
    let starts = default_start_lattice(spec, 0.0, &spec.nu0);
    Ok(enumerate_stationary(spec, 0.0, &spec.nu0, &starts, &ShootingOptions::default())?)
}

/// Largest first terminal component among the deterministic minimizers.
pub(super) fn upper_terminal(set: &StationarySet) -> f64 {
    set.minimizers().map(|s| s.terminal()[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// The stationary point whose whole trajectory stays at the origin.
pub(super) fn origin_solution(set: &StationarySet) -> Option<&mfselect_core::control::OCSolution> {
    set.solutions
        .iter()
        .find(|s| s.m.iter().chain(&s.eta).all(|v| v.amax() < 1e-8))
}

pub(super) fn is_origin(nu0: &Vector) -> bool {
    nu0.iter().all(|v| *v == 0.0)
}

pub(super) fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// `(param, value)` of the sweep rows that carry `key`.
pub(super) fn sweep_series(rows: &[Row], key: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|r| Some((r.param?, r.get(key)?)))
        .collect()
}

pub(super) fn fmt_series(series: &[(f64, f64)]) -> String {
    series
        .iter()
        .map(|(p, v)| format!("{p}: {v:.4e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One verdict per sweep row: the sign frequency lies in its band.
pub(super) fn sign_band_verdicts(rows: &[Row]) -> Vec<Verdict> {
    rows.iter()
        .filter(|r| r.param.is_some())
        .filter_map(|r| {
            let (p, lo, hi) = (r.get("pos_freq")?, r.get("band_lo")?, r.get("band_hi")?);
            Some(Verdict::new(
                format!("sign band {}", r.label),
                lo <= p && p <= hi,
                format!("frequency {p:.4} in [{lo:.4}, {hi:.4}]"),
            ))
        })
        .collect()
}

/// Strict decrease of `key` over the sweep rows whose N lies in `subset`
/// (all sweep rows when empty).
pub(super) fn trend_verdict(name: &str, rows: &[Row], key: &str, subset: &[usize]) -> Verdict {
    let all = sweep_series(rows, key);
    let series: Vec<(f64, f64)> = if subset.is_empty() {
        all
    } else {
        let picked: Vec<(f64, f64)> = all.iter().copied().filter(|(p, _)| subset.contains(&(*p as usize))).collect();
        if picked.len() != subset.len() {
            return Verdict::new(name, false, format!("trend values {subset:?} are not all in the sweep"));
        }
        picked
    };
    let values: Vec<f64> = series.iter().map(|s| s.1).collect();
    let ok = values.len() >= 2 && strictly_decreasing(&values);
    Verdict::new(name, ok, fmt_series(&series))
}
