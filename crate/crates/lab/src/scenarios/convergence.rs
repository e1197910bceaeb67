use mfselect_core::meanfield::{simulate, FieldProblem, NoiseModel, PathEnsemble, Policy, SimulationOptions};
use mfselect_core::potentials::{ModelSpec, Potential};

use super::common::{field, moments, new_row, players_ensemble, sim_options, stationary, sweep_n, sweep_series, trend_verdict};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 7] = ["sup_mean_error", "mean_mT", "var_mT", "se_mean_mT", "exit_fraction", "cost_mean", "cost_se"];

/// Convex when `weight + λ_min(∇²p) ≥ 0` for a quadratic `p`.
fn convex_with(p: &dyn Potential, weight: f64) -> bool {
    p.quadratic_form()
        .map(|q| weight + q.hessian.symmetric_eigenvalues().min() >= 0.0)
        .unwrap_or(false)
}

pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    let spec = cfg.spec()?;
    if !convex_with(spec.g.as_ref(), 1.0) || !convex_with(spec.f.as_ref(), spec.state_weight()) {
        return Err(LabError::Config(format!("E1 needs a convex quadratic model, got {}", spec.name)));
    }
    Ok(())
}

/// `sup_t E|m_t − m̂_t|` over the recorded times.
fn sup_mean_error(spec: &ModelSpec, e: &PathEnsemble) -> Result<f64, LabError> {
    let set = stationary(spec)?;
    if set.multiplicity != 1 {
        return Err(LabError::Config(format!("E1 needs a unique minimizer, found {}", set.multiplicity)));
    }
    let best = set.best();
    let d = e.dim;
    let mut sup: f64 = 0.0;
    for (k, &t) in e.times.iter().enumerate() {
        let target = best.state_at(t);
        let total: f64 = (0..e.paths.len())
            .map(|p| {
                let m = e.state(p, k);
                (0..d).map(|c| (m[c] - target[c]).powi(2)).sum::<f64>().sqrt()
            })
            .sum();
        sup = sup.max(total / e.paths.len() as f64);
    }
    Ok(sup)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let mut row = new_row(cfg, plan);
    let spec = cfg.spec()?;
    match plan.label.as_str() {
        "N=inf" => {
            let f = field(cfg, &spec, FieldProblem::limit())?;
            let opts = SimulationOptions { paths: 1, ..sim_options(cfg, plan) };
            let e = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Deterministic, 0.0, &opts)?;
            row.set("sup_mean_error", sup_mean_error(&spec, &e)?);
            moments(&mut row, &e);
        }
        "symmetric" => {
            let centred = cfg.spec_at(0.0)?;
            let e = players_ensemble(cfg, &centred, cfg.sweep.n[0], plan)?;
            moments(&mut row, &e);
        }
        _ => {
            let e = players_ensemble(cfg, &spec, sweep_n(plan), plan)?;
            row.set("sup_mean_error", sup_mean_error(&spec, &e)?);
            moments(&mut row, &e);
        }
    }
    Ok(row)
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let th = &cfg.thresholds;
    let mut v = vec![trend_verdict("error decreasing in N", rows, "sup_mean_error", &[])];
    if let Some(&(n, err)) = sweep_series(rows, "sup_mean_error").last() {
        v.push(Verdict::new(
            "error at largest N",
            err < th.mean_error,
            format!("N={n}: {err:.4e} < {:.1e}", th.mean_error),
        ));
    }
    if let Some(err) = rows.iter().find(|r| r.label == "N=inf").and_then(|r| r.get("sup_mean_error")) {
        v.push(Verdict::new(
            "noiseless error",
            err < th.limit_error,
            format!("{err:.4e} < {:.1e}", th.limit_error),
        ));
    }
    if let Some(r) = rows.iter().find(|r| r.label == "symmetric") {
        if let (Some(m), Some(se)) = (r.get("mean_mT"), r.get("se_mean_mT")) {
            v.push(Verdict::new(
                "symmetric mean",
                m.abs() <= th.band_sigmas * se,
                format!("|{m:.4e}| <= {} x {se:.4e}", th.band_sigmas),
            ));
        }
    }
    (v, Vec::new())
}
