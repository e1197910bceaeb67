use std::sync::Arc;

use mfselect_core::control::{enumerate_stationary, default_start_lattice, value_shooting, ShootingOptions};
use mfselect_core::meanfield::io::{write_ensemble, write_field_slice};
use mfselect_core::meanfield::*;
use mfselect_core::numerics::{stats, Matrix, SpaceGrid, TimeGrid, Vector};
use mfselect_core::potentials::{
    grad_g_n, grad_g_weighted, InitialLaw, ModelFamily, ModelOptions, ModelSpec, Quadratic, RunningCost, Zero,
};
use mfselect_core::Error;

fn logcosh(nu0: f64) -> ModelSpec {
    ModelFamily::LogCosh { kappa: 4.0 }
        .build(&ModelOptions { nu0: vec![nu0], ..Default::default() })
        .unwrap()
}

fn radial() -> ModelSpec {
    ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }.build(&ModelOptions::default()).unwrap()
}

fn zero_data(running: RunningCost) -> ModelSpec {
    ModelSpec {
        name: "zero".into(),
        drift: Matrix::zeros(1, 1),
        sigma: 1.0,
        horizon: 1.0,
        running,
        f: Arc::new(Zero::new(1)),
        g: Arc::new(Zero::new(1)),
        nu0: Vector::zeros(1),
        initial: InitialLaw::default(),
    }
}

fn setup(l: f64, dx: f64) -> FieldSetup {
    FieldSetup { half_width: Some(l), spacing: dx, ..Default::default() }
}

#[test]
fn terminal_layer_is_exact() {
    let spec = logcosh(0.0);
    let f = setup(4.0, 0.05).solve(&spec, FieldProblem::players(&spec, 100).unwrap()).unwrap();
    let last = f.times.steps();
    for p in 0..f.grid.len() {
        let g = grad_g_n(&spec, 100, &Vector::from_vec(f.grid.point(p))).unwrap();
        assert_eq!(f.node_value(last, p)[0], g[0]);
    }
    let e = setup(4.0, 0.05).solve(&spec, FieldProblem::common_noise(0.2).unwrap()).unwrap();
    for p in 0..e.grid.len() {
        let m = Vector::from_vec(e.grid.point(p));
        let g = grad_g_weighted(&spec, 0.0, &m).unwrap();
        assert_eq!(e.node_value(e.times.steps(), p)[0], m[0] + spec.g.gradient(&m)[0]);
        assert_eq!(e.node_value(e.times.steps(), p)[0], g[0]);
    }
}

#[test]
fn zero_data_field_is_identity() {
    let spec = zero_data(RunningCost::Tracking);
    let f = setup(3.0, 0.02).solve(&spec, FieldProblem::players(&spec, 10).unwrap()).unwrap();
    let oracle = riccati_field_oracle(&spec, &f.problem, 1000).unwrap();
    assert!(oracle.p.iter().all(|p| (p[(0, 0)] - 1.0).abs() < 1e-14));
    assert!(oracle.r.iter().all(|r| r[0] == 0.0));
    assert!(oracle_error(&f, &oracle, 0.5).max_abs < 1e-6);
}

#[test]
fn quadratic_oracle_agreement_and_refinement() {
    let spec = ModelFamily::Quadratic { c: 1.0 }.build(&ModelOptions::default()).unwrap();
    let problem = FieldProblem::players(&spec, 10).unwrap();
    let oracle = riccati_field_oracle(&spec, &problem, 4000).unwrap();
    assert!((oracle.p[4000][(0, 0)] - 2.2).abs() < 1e-14);
    let coarse = FieldSetup { spacing: 0.02, ..Default::default() }.solve(&spec, problem).unwrap();
    let fine = FieldSetup { spacing: 0.01, ..Default::default() }.solve(&spec, problem).unwrap();
    let (ec, ef) = (oracle_error(&coarse, &oracle, 0.5), oracle_error(&fine, &oracle, 0.5));
    assert!(ec.max_rel < 1e-2, "{ec:?}");
    assert!(ec.max_rel >= 2.0 * ef.max_rel, "{ec:?} {ef:?}");
}

#[test]
fn eps_field_matches_reminder_free_oracle() {
    let spec = ModelFamily::Quadratic { c: 1.0 }.build(&ModelOptions::default()).unwrap();
    let problem = FieldProblem::common_noise(0.3).unwrap();
    let oracle = riccati_field_oracle(&spec, &problem, 4000).unwrap();
    assert!((oracle.p[4000][(0, 0)] - 2.0).abs() < 1e-14);
    let f = FieldSetup { spacing: 0.02, ..Default::default() }.solve(&spec, problem).unwrap();
    assert!(oracle_error(&f, &oracle, 0.5).max_rel < 1e-2);
}

#[test]
fn linear_terminal_shifts_the_oracle() {
    let kappa = 0.7;
    let spec = ModelSpec {
        g: Arc::new(Quadratic::linear(Vector::from_element(1, kappa)).unwrap()),
        ..zero_data(RunningCost::Tracking)
    };
    let m = Vector::from_element(1, 1.3);
    assert_eq!(grad_g_n(&spec, 10, &m).unwrap()[0], 1.3 + kappa);
    let problem = FieldProblem::players(&spec, 10).unwrap();
    let oracle = riccati_field_oracle(&spec, &problem, 1000).unwrap();
    assert_eq!(oracle.r[1000][0], kappa);
    let f = setup(4.0, 0.02).solve(&spec, problem).unwrap();
    assert!(oracle_error(&f, &oracle, 0.5).max_abs < 1e-4);
}

#[test]
fn odd_symmetry_for_even_data() {
    let spec = logcosh(0.0);
    for problem in [FieldProblem::players(&spec, 100).unwrap(), FieldProblem::common_noise(0.1).unwrap()] {
        let f = setup(5.0, 0.02).solve(&spec, problem).unwrap();
        assert!(f.odd_symmetry_defect() < 1e-10);
        let centre = f.grid.len() / 2;
        for k in 0..f.times.nodes() {
            assert_eq!(f.node_value(k, centre)[0], 0.0);
        }
        assert_eq!(f.eval_vec(0.37, &Vector::zeros(1))[0], 0.0);
        let a = f.eval_vec(0.41, &Vector::from_element(1, 0.733))[0];
        let b = f.eval_vec(0.41, &Vector::from_element(1, -0.733))[0];
        assert_eq!(a, -b);
    }
}

#[test]
fn quarter_turn_equivariance() {
    let spec = radial();
    let f = FieldSetup { half_width: Some(2.5), spacing: 0.05, max_stored_levels: 50, ..Default::default() }
        .solve(&spec, FieldProblem::players(&spec, 50).unwrap())
        .unwrap();
    let n = f.grid.axis(0).nodes();
    for k in [0, f.times.steps() / 2, f.times.steps()] {
        for i in 0..n {
            for j in 0..n {
                // R(x_i, y_j) = (−y_j, x_i) is the node (n−1−j, i)
                let u = f.node_value(k, f.grid.index(&[i, j]));
                let ur = f.node_value(k, f.grid.index(&[n - 1 - j, i]));
                assert_eq!(ur[0], -u[1]);
                assert_eq!(ur[1], u[0]);
            }
        }
    }
    for &(x, y, t) in &[(0.31, -0.77, 0.0), (1.234, 0.05, 0.43), (-2.0, 1.11, 0.97)] {
        let (mut u, mut ur) = ([0.0; 2], [0.0; 2]);
        f.eval(t, &[x, y], &mut u);
        f.eval(t, &[-y, x], &mut ur);
        assert_eq!(ur[0], -u[1]);
        assert_eq!(ur[1], u[0]);
    }
}

#[test]
fn eps_and_n_fields_coincide_without_reminders() {
    let spec = logcosh(0.0);
    let n = 16;
    let a = setup(4.0, 0.04).solve(&spec, FieldProblem::players(&spec, n).unwrap().without_reminders()).unwrap();
    let b = setup(4.0, 0.04).solve(&spec, FieldProblem::common_noise(spec.sigma / 4.0).unwrap()).unwrap();
    assert_eq!(a.times, b.times);
    assert!((a.problem.diffusion - b.problem.diffusion).abs() < 1e-16);
    let diff = a
        .values
        .iter()
        .flatten()
        .zip(b.values.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}

#[test]
fn unstable_steps_are_refused() {
    let spec = logcosh(0.0);
    let grid = SpaceGrid::symmetric_with_spacing(1, 4.0, 0.02).unwrap();
    let coarse = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let problem = FieldProblem::players(&spec, 10).unwrap();
    let err = solve_field(&spec, problem, &grid, &coarse, 1, true).unwrap_err();
    assert!(matches!(err, Error::CflViolation { .. }), "{err}");
    let grid = SpaceGrid::symmetric_with_spacing(1, 4.0, 0.002).unwrap();
    let err = solve_field_n(&spec, 1, &grid, &TimeGrid::new(0.0, 1.0, 1000).unwrap()).unwrap_err();
    assert!(matches!(err, Error::CflViolation { ratio: "nu dt/dx^2", .. }), "{err}");
}

#[test]
fn noiseless_flow_follows_the_unique_minimizer() {
    let opts = ShootingOptions::default();
    for spec in [
        ModelFamily::Quadratic { c: 1.0 }
            .build(&ModelOptions { nu0: vec![1.0], initial: InitialLaw::Dirac, ..Default::default() })
            .unwrap(),
        ModelSpec { initial: InitialLaw::Dirac, ..logcosh(0.5) },
    ] {
        let set = enumerate_stationary(&spec, 0.0, &spec.nu0, &default_start_lattice(&spec, 0.0, &spec.nu0), &opts)
            .unwrap();
        assert_eq!(set.multiplicity, 1);
        let best = set.best();
        for problem in [FieldProblem::limit(), FieldProblem::players(&spec, 1000).unwrap()] {
            let f = FieldSetup { half_width: Some(5.0), ..Default::default() }.solve(&spec, problem).unwrap();
            let sim = SimulationOptions { paths: 1, steps: 2000, record_every: 10, ..Default::default() };
            let e = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Deterministic, 0.0, &sim).unwrap();
            let err = e
                .times
                .iter()
                .enumerate()
                .map(|(k, &t)| (e.state(0, k)[0] - best.state_at(t)[0]).abs())
                .fold(0.0, f64::max);
            assert!(err < 2e-2, "{} sup error {err}", spec.name);
            let value = value_shooting(&spec, 0.0, &spec.nu0, &opts).unwrap();
            assert!((e.paths[0].cost - value).abs() < 5e-2);
        }
    }
}

#[test]
fn zero_path_has_zero_cost() {
    let spec = ModelSpec { initial: InitialLaw::Dirac, ..zero_data(RunningCost::ControlOnly) };
    let sim = SimulationOptions { paths: 3, steps: 50, ..Default::default() };
    let e = simulate(&spec, &Policy::Zero, NoiseModel::Deterministic, 0.0, &sim).unwrap();
    assert!(e.paths.iter().all(|p| p.cost == 0.0 && p.m.iter().all(|m| *m == 0.0)));
}

#[test]
fn linear_feedback_variance_matches_lyapunov() {
    // u = m: dm = −m dt + s dB, Var m_T = Var m0 e^{−2T} + s² (1 − e^{−2T}) / 2
    let spec = zero_data(RunningCost::Tracking);
    let n = 4;
    let f = setup(3.0, 0.02).solve(&spec, FieldProblem::players(&spec, n).unwrap()).unwrap();
    let sim = SimulationOptions { paths: 4000, steps: 500, seed: 3, record_every: 500, cost: false, ..Default::default() };
    let e = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(n), 0.0, &sim).unwrap();
    let x: Vec<f64> = e.terminals().into_iter().map(|v| v[0]).collect();
    let s2 = 1.0 / n as f64;
    let var0 = 1.0 / n as f64;
    let decay = (-2.0f64).exp();
    let target = var0 * decay + s2 * (1.0 - decay) / 2.0;
    let var = stats::variance(&x);
    let se_var = target * (2.0 / x.len() as f64).sqrt();
    assert!((var - target).abs() < 3.0 * se_var, "{var} vs {target}");
    let se_mean = (target / x.len() as f64).sqrt();
    assert!(stats::mean(&x).abs() < 3.0 * se_mean);
    assert_eq!(e.clamped_fraction(), 0.0);
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let spec = logcosh(0.0);
    let f = setup(5.0, 0.05).solve(&spec, FieldProblem::players(&spec, 50).unwrap()).unwrap();
    let sim = SimulationOptions { paths: 8, steps: 200, seed: 42, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(50), 0.0, &sim).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a, b);
    assert_eq!(a.paths.len(), 8);
}

#[test]
fn rotated_noise_rotates_the_ensemble_bitwise() {
    let spec = radial();
    let f = FieldSetup { half_width: Some(3.0), spacing: 0.05, max_stored_levels: 50, ..Default::default() }
        .solve(&spec, FieldProblem::players(&spec, 100).unwrap())
        .unwrap();
    let base = SimulationOptions { paths: 16, steps: 300, seed: 9, record_every: 30, ..Default::default() };
    let rot = SimulationOptions { transform: NoiseTransform::Rotate90, ..base };
    let a = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(100), 0.0, &base).unwrap();
    let b = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(100), 0.0, &rot).unwrap();
    for (pa, pb) in a.paths.iter().zip(&b.paths) {
        for (x, y) in pa.m.chunks(2).zip(pb.m.chunks(2)) {
            assert_eq!(y[0], -x[1]);
            assert_eq!(y[1], x[0]);
        }
        for (x, y) in pa.eta.chunks(2).zip(pb.eta.chunks(2)) {
            assert_eq!(y[0], -x[1]);
            assert_eq!(y[1], x[0]);
        }
        assert_eq!(pa.cost, pb.cost);
    }
}

#[test]
fn optimal_feedback_beats_doing_nothing() {
    let spec = logcosh(0.0);
    let n = 200;
    let f = setup(5.0, 0.02).solve(&spec, FieldProblem::players(&spec, n).unwrap()).unwrap();
    let sim = SimulationOptions { paths: 1000, steps: 500, seed: 5, record_every: 500, ..Default::default() };
    let opt = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(n), 0.0, &sim).unwrap();
    let idle = simulate(&spec, &Policy::Zero, NoiseModel::Players(n), 0.0, &sim).unwrap();
    let diff: Vec<f64> = idle.paths.iter().zip(&opt.paths).map(|(a, b)| a.cost - b.cost).collect();
    let se = (stats::variance(&diff) / diff.len() as f64).sqrt();
    assert!(stats::mean(&diff) > 3.0 * se, "{} vs se {se}", stats::mean(&diff));
}

#[test]
fn small_boxes_raise_a_clamp_warning() {
    let spec = logcosh(0.0);
    let f = setup(1.0, 0.05).solve(&spec, FieldProblem::players(&spec, 50).unwrap()).unwrap();
    let sim = SimulationOptions { paths: 50, steps: 200, ..Default::default() };
    let e = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(50), 0.0, &sim).unwrap();
    assert!(e.clamped_fraction() > 0.5);
    assert!(e.clamp_warning().is_some());
}

#[test]
fn csv_exports_have_fixed_columns() {
    let spec = radial();
    let f = FieldSetup { half_width: Some(2.0), spacing: 0.25, max_stored_levels: 10, ..Default::default() }
        .solve(&spec, FieldProblem::players(&spec, 100).unwrap())
        .unwrap();
    let mut buf = Vec::new();
    write_field_slice(&f, 0.0, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "m1,m2,u1,u2");
    assert_eq!(text.lines().count(), 1 + f.grid.len());

    let sim = SimulationOptions { paths: 2, steps: 10, record_every: 5, ..Default::default() };
    let e = simulate(&spec, &Policy::Feedback(&f), NoiseModel::Players(100), 0.0, &sim).unwrap();
    let mut buf = Vec::new();
    write_ensemble(&e, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "path,t,m1,m2,eta1,eta2");
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}
