use mfselect_core::meanfield::{riccati_field_oracle, simulate, FieldProblem, NoiseModel, Policy, RiccatiField, SimulationOptions};
use mfselect_core::numerics::{stats, Vector};
use mfselect_core::potentials::ModelSpec;

use super::common::{field, first_components, new_row, sign_band_verdicts, signs, sim_options, trend_verdict};
use super::RowPlan;
use crate::config::ScenarioConfig;
use crate::report::{Row, Verdict};
use crate::LabError;

pub const COLUMNS: [&str; 13] = [
    "pos_freq", "band_lo", "band_hi", "mean_mT", "var_mT", "se_mean_mT", "mean_mT_off", "var_mT_off", "se_mean_off",
    "se_var_off", "oracle_mean", "oracle_var", "exit_fraction",
];

const ORACLE_STEPS: usize = 4000;

pub fn check(cfg: &ScenarioConfig) -> Result<(), LabError> {
    if cfg.spec()?.dim() != 1 {
        return Err(LabError::Config("E5 runs one-dimensional models".into()));
    }
    Ok(())
}

fn is_linear_quadratic(spec: &ModelSpec) -> bool {
    spec.f.quadratic_form().is_some() && spec.g.quadratic_form().is_some()
}

/// Mean and variance of `m_T` for `dm = (b m − P m − r) dt + ε dB` from a
/// deterministic start, by RK4 on the moment equations.
fn gaussian_oracle(spec: &ModelSpec, oracle: &RiccatiField, eps: f64) -> (f64, f64) {
    let b = spec.drift[(0, 0)];
    let affine = |t: f64| {
        let r = oracle.eval(t, &Vector::zeros(1))[0];
        (oracle.eval(t, &Vector::from_element(1, 1.0))[0] - r, r)
    };
    let rhs = |t: f64, mu: f64, var: f64| {
        let (p, r) = affine(t);
        ((b - p) * mu - r, 2.0 * (b - p) * var + eps * eps)
    };
    let h = spec.horizon / ORACLE_STEPS as f64;
    let (mut mu, mut var) = (spec.nu0[0], 0.0);
    for k in 0..ORACLE_STEPS {
        let t = k as f64 * h;
        let k1 = rhs(t, mu, var);
        let k2 = rhs(t + 0.5 * h, mu + 0.5 * h * k1.0, var + 0.5 * h * k1.1);
        let k3 = rhs(t + 0.5 * h, mu + 0.5 * h * k2.0, var + 0.5 * h * k2.1);
        let k4 = rhs(t + h, mu + h * k3.0, var + h * k3.1);
        mu += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        var += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (mu, var)
}

pub fn row(cfg: &ScenarioConfig, plan: &RowPlan) -> Result<Row, LabError> {
    let eps = plan.param.expect("eps rows are sweep rows");
    let mut row = new_row(cfg, plan);
    let spec = cfg.spec()?;
    let problem = FieldProblem::common_noise(eps)?;
    let f = field(cfg, &spec, problem)?;
    let base = sim_options(cfg, plan);
    let mut exits: f64 = 0.0;

    if spec.is_even() {
        let centred = cfg.spec_at(0.0)?;
        let e = simulate(&centred, &Policy::Feedback(&f), NoiseModel::Common(eps), 0.0, &base)?;
        let x = first_components(&e);
        signs(&mut row, cfg, &x);
        let var = stats::variance(&x);
        row.set("mean_mT", stats::mean(&x))
            .set("var_mT", var)
            .set("se_mean_mT", (var / x.len() as f64).sqrt());
        exits = exits.max(e.clamped_fraction());
    }

    // the off-centre ensemble continues the row's stream range
    let off = cfg.spec_at(cfg.thresholds.offcentre)?;
    let opts = SimulationOptions { stream_offset: base.stream_offset + base.paths as u64, ..base };
    let e = simulate(&off, &Policy::Feedback(&f), NoiseModel::Common(eps), 0.0, &opts)?;
    let x = first_components(&e);
    let (mean, var) = (stats::mean(&x), stats::variance(&x));
    let m = x.len() as f64;
    row.set("mean_mT_off", mean)
        .set("var_mT_off", var)
        .set("se_mean_off", (var / m).sqrt())
        .set("se_var_off", var * (2.0 / (m - 1.0)).sqrt());
    exits = exits.max(e.clamped_fraction());
    row.set("exit_fraction", exits);

    if is_linear_quadratic(&off) {
        let oracle = riccati_field_oracle(&off, &problem, ORACLE_STEPS)?;
        let (om, ov) = gaussian_oracle(&off, &oracle, eps);
        row.set("oracle_mean", om).set("oracle_var", ov);
    }
    Ok(row)
}

pub fn evaluate(cfg: &ScenarioConfig, rows: &[Row]) -> (Vec<Verdict>, Vec<String>) {
    let k = cfg.thresholds.band_sigmas;
    let mut v = sign_band_verdicts(rows);
    v.push(trend_verdict("off-centre variance decreasing in eps", rows, "var_mT_off", &[]));
    for r in rows {
        let (Some(om), Some(ov)) = (r.get("oracle_mean"), r.get("oracle_var")) else { continue };
        let (mean, var) = (r.get("mean_mT_off").unwrap_or(f64::NAN), r.get("var_mT_off").unwrap_or(f64::NAN));
        let (sm, sv) = (r.get("se_mean_off").unwrap_or(f64::NAN), r.get("se_var_off").unwrap_or(f64::NAN));
        v.push(Verdict::new(
            format!("Gaussian oracle {}", r.label),
            (mean - om).abs() <= k * sm && (var - ov).abs() <= k * sv,
            format!("mean {mean:.5} vs {om:.5} (se {sm:.1e}), var {var:.5} vs {ov:.5} (se {sv:.1e})"),
        ));
    }
    (v, Vec::new())
}
