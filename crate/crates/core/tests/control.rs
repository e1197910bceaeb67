use mfselect_core::control::*;
use mfselect_core::numerics::{delarue_riccati, TimeGrid, Vector};
use mfselect_core::potentials::{ModelFamily, ModelOptions, ModelSpec};

/// Positive root of `2a = κ tanh a`, by bisection.
fn a_hat(kappa: f64) -> f64 {
    let (mut lo, mut hi) = (0.5, kappa);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * mid - kappa * mid.tanh() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn model(family: ModelFamily, nu0: Vec<f64>) -> ModelSpec {
    family
        .build(&ModelOptions { nu0, ..Default::default() })
        .unwrap()
}

fn enumerate(spec: &ModelSpec) -> StationarySet {
    let starts = default_start_lattice(spec, 0.0, &spec.nu0);
    enumerate_stationary(spec, 0.0, &spec.nu0, &starts, &ShootingOptions::default()).unwrap()
}

#[test]
fn logcosh_shooting_hits_constant_root() {
    let spec = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]);
    let a = a_hat(4.0);
    assert!((a - 1.9150).abs() < 1e-4);
    let sol = shoot(&spec, 0.0, &spec.nu0, &Vector::from_element(1, -2.0), &ShootingOptions::default()).unwrap();
    assert!(sol.residual < 1e-9);
    for e in &sol.eta {
        assert!((e[0] + a).abs() < 1e-8);
    }
    for (c, e) in sol.control().iter().zip(&sol.eta) {
        assert_eq!(c[0], -e[0]);
    }
}

#[test]
fn logcosh_origin_has_three_stationary_points() {
    let spec = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]);
    let set = enumerate(&spec);
    let a = a_hat(4.0);
    assert_eq!(set.solutions.len(), 3);
    assert_eq!(set.multiplicity, 2);
    let mut eta0: Vec<f64> = set.minimizers().map(|s| s.eta0()[0]).collect();
    eta0.sort_by(f64::total_cmp);
    assert!((eta0[0] + a).abs() < 1e-8 && (eta0[1] - a).abs() < 1e-8);
    let middle = &set.solutions[2];
    assert_eq!(middle.classification, Classification::StationaryOnly);
    assert!(middle.eta0()[0].abs() < 1e-8);
    assert!(middle.cost > set.min_cost);

    // symmetry (m, η) ↦ (−m, −η)
    for s in &set.solutions {
        let mirror = set.nearest(&(-s.eta0()));
        assert!((mirror.eta0() + s.eta0()).amax() < 1e-7);
        assert!((mirror.terminal() + s.terminal()).amax() < 1e-7);
        assert!((mirror.cost - s.cost).abs() < 1e-9);
    }
}

#[test]
fn logcosh_off_center_unique_minimizer() {
    let spec = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.5]);
    let set = enumerate(&spec);
    assert_eq!(set.multiplicity, 1);
    let best = set.best();
    assert!(best.terminal()[0] > 0.0);
    let negative = set.solutions.iter().find(|s| s.terminal()[0] < -1.0).unwrap();
    assert!(negative.cost > best.cost + 1e-3);
    assert_eq!(negative.classification, Classification::StationaryOnly);
}

#[test]
fn convex_model_has_single_stationary_point() {
    for c in [0.0, 1.0, 3.0] {
        let spec = model(ModelFamily::Quadratic { c }, vec![1.0]);
        let set = enumerate(&spec);
        assert_eq!(set.solutions.len(), 1, "c = {c}");
        assert_eq!(set.best().classification, Classification::Minimizer);
    }
}

#[test]
fn constant_controls_and_static_reduction() {
    let cases = [
        model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]),
        model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.5]),
        model(ModelFamily::LogCosh { kappa: 3.0 }, vec![-0.2]),
        model(ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }, vec![0.3, -0.4]),
    ];
    for spec in &cases {
        let set = enumerate(spec);
        for s in &set.solutions {
            assert!(s.adjoint_variation() < 1e-8);
        }
        let stat = static_minimize(spec, 0.0, &spec.nu0).unwrap();
        assert!((stat.value - set.min_cost).abs() < 1e-6, "{}: {} vs {}", spec.name, stat.value, set.min_cost);
    }
}

#[test]
fn static_u_examples() {
    let free = ModelFamily::LogCosh { kappa: 4.0 }.build(&ModelOptions::default()).unwrap();
    let a = a_hat(4.0);
    let u = |x: f64| static_u(&free, 0.0, &Vector::zeros(1), &Vector::from_element(1, x)).unwrap();
    for x in [-1.0, 0.3, 2.0] {
        assert!((u(x) - (x * x - 4.0 * x.cosh().ln())).abs() < 1e-12);
    }
    let min = static_minimize(&free, 0.0, &Vector::zeros(1)).unwrap();
    assert!((min.value - (a * a - 4.0 * a.cosh().ln())).abs() < 1e-10);
}

#[test]
fn value_function_examples() {
    let opts = ShootingOptions::default();
    let descent = DescentOptions::default();

    let free = model(ModelFamily::Quadratic { c: 0.0 }, vec![0.7]);
    let r = value_function(&free, 0.0, &free.nu0, &opts, &descent).unwrap();
    assert!((r.value - 0.5 * 0.49).abs() < 1e-7);
    assert!(r.consistent(), "{:?}", r.warning);

    let lc = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]);
    let a = a_hat(4.0);
    let r = value_function(&lc, 0.0, &lc.nu0, &opts, &descent).unwrap();
    assert!((r.value - (a * a - 4.0 * a.cosh().ln())).abs() < 1e-9);
    assert!(r.consistent(), "{:?}", r.warning);

    for nu in [-0.4, 0.9] {
        let x = Vector::from_element(1, nu);
        let at_t = value_function(&lc, 1.0, &x, &opts, &descent).unwrap();
        let expect = 0.5 * nu * nu - 4.0 * nu.cosh().ln();
        assert!((at_t.value - expect).abs() < 1e-14);
    }
}

#[test]
fn value_cross_check_with_drift_and_tracking() {
    let spec = ModelFamily::Delarue { delta: 0.1, rho: None }
        .build(&ModelOptions { drift: 0.4, nu0: vec![0.3], ..Default::default() })
        .unwrap();
    let r = value_function(&spec, 0.0, &spec.nu0, &ShootingOptions::default(), &DescentOptions::default()).unwrap();
    assert!(r.consistent(), "{:?}", r.warning);
}

#[test]
fn value_is_even_for_even_data() {
    let spec = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]);
    let opts = ShootingOptions::default();
    for nu in [0.1, 0.45, 1.3] {
        let p = value_shooting(&spec, 0.0, &Vector::from_element(1, nu), &opts).unwrap();
        let m = value_shooting(&spec, 0.0, &Vector::from_element(1, -nu), &opts).unwrap();
        assert!((p - m).abs() < 1e-10);
    }
}

#[test]
fn differentiability_verdicts() {
    let opts = ShootingOptions::default();
    let h = DEFAULT_PROBE_STEP;
    let quad = model(ModelFamily::Quadratic { c: 1.0 }, vec![0.0]);
    for nu in [-1.0, 0.0, 0.5] {
        let p = differentiability_probe(&quad, 0.0, &Vector::from_element(1, nu), h, &opts).unwrap();
        assert_eq!(p.verdict, Verdict::Differentiable);
    }
    let lc = model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]);
    let kink = differentiability_probe(&lc, 0.0, &Vector::zeros(1), h, &opts).unwrap();
    assert_eq!(kink.verdict, Verdict::Kink);
    let a = a_hat(4.0);
    // concave corner: v is a minimum of two smooth branches
    assert!((kink.left[0] - a).abs() < 1e-2 && (kink.right[0] + a).abs() < 1e-2, "{kink:?}");
    let smooth = differentiability_probe(&lc, 0.0, &Vector::from_element(1, 0.5), h, &opts).unwrap();
    assert_eq!(smooth.verdict, Verdict::Differentiable);
}

#[test]
fn delarue_trajectories_match_closed_form() {
    let spec = model(ModelFamily::Delarue { delta: 0.1, rho: None }, vec![0.0]);
    let set = enumerate(&spec);
    assert_eq!(set.solutions.len(), 3);
    assert_eq!(set.multiplicity, 2);

    let grid = TimeGrid::with_resolution(0.0, 1.0, 1000).unwrap();
    let curves = delarue_riccati(0.0, &grid).unwrap();
    let upper = curves.upper_trajectory();
    let plus = set.minimizers().find(|s| s.terminal()[0] > 0.0).unwrap();
    let minus = set.minimizers().find(|s| s.terminal()[0] < 0.0).unwrap();
    let err = plus
        .m
        .iter()
        .zip(&minus.m)
        .zip(&upper)
        .map(|((p, m), u)| (p[0] - u).abs().max((m[0] + u).abs()))
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "max error {err}");
    assert!((plus.terminal()[0] - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-3);

    let middle = set.nearest(&Vector::zeros(1));
    assert!(middle.eta0()[0].abs() < 1e-9);
    assert_eq!(middle.classification, Classification::StationaryOnly);
    assert!(middle.cost > set.min_cost);
}

#[test]
fn delarue_closed_form_with_drift() {
    let b = 0.5;
    let spec = ModelFamily::Delarue { delta: 0.1, rho: None }
        .build(&ModelOptions { drift: b, ..Default::default() })
        .unwrap();
    let set = enumerate(&spec);
    let grid = TimeGrid::with_resolution(0.0, 1.0, 1000).unwrap();
    let upper = delarue_riccati(b, &grid).unwrap().upper_trajectory();
    let plus = set.minimizers().find(|s| s.terminal()[0] > 0.0).unwrap();
    let err = plus.m.iter().zip(&upper).map(|(p, u)| (p[0] - u).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "max error {err}");
}

#[test]
fn discrete_gradient_vanishes_at_shooting_solutions() {
    for spec in [
        model(ModelFamily::LogCosh { kappa: 4.0 }, vec![0.0]),
        model(ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }, vec![0.2, 0.1]),
    ] {
        let set = enumerate(&spec);
        let problem = DiscreteControl::new(&spec, 0.0, &spec.nu0, 200).unwrap();
        for s in &set.solutions {
            let controls = problem.average_controls(&s.control()).unwrap();
            let (_, grad) = problem.cost_and_gradient(&controls).unwrap();
            assert!(problem.gradient_norm(&grad) < 1e-6);
        }
    }
}

#[test]
fn radial_minimizers_lie_on_circle() {
    let spec = model(ModelFamily::RadialLogCosh { kappa: 4.0, dim: 2 }, vec![0.0, 0.0]);
    let set = enumerate(&spec);
    let a = a_hat(4.0);
    let mut on_circle = 0;
    for s in set.minimizers() {
        assert!((s.eta0().norm() - a).abs() < 1e-7);
        on_circle += 1;
    }
    assert!(on_circle >= 4);
    let origin = set.nearest(&Vector::zeros(2));
    assert!(origin.eta0().norm() < 1e-9);
    assert_eq!(origin.classification, Classification::StationaryOnly);
    let StaticMinimizers::Sphere { radius } = static_minimize(&spec, 0.0, &spec.nu0).unwrap().minimizers else {
        panic!("expected a sphere of minimizers")
    };
    assert!((radius - a).abs() < 1e-10);
}
