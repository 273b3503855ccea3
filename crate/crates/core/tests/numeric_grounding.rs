mod common;

use flowsym::numeric::{
    evaluate, integrate, max_norm, ConcreteVectorField, EvaluationConfig, FlowDerivative, Oracle,
};
use flowsym::render::to_text;
use flowsym::rewrite::reduction_identity;
use flowsym::scenarios::{run_check, CheckId};
use flowsym::{flow, Context};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn every_pipeline_stage_evaluates_to_zero() {
    for id in CheckId::ALL {
        let report = run_check(id).unwrap();
        let oracle = Oracle::default().with_seed(11).with_relations(&report.relations);
        for (step, ex) in &report.steps {
            let z = oracle.assert_zero(ex, 10).unwrap();
            println!("{id} {step}: max norm {:e}", z.max_norm);
            assert!(z.passed, "{id} after {step}: {z:?}");
        }
    }
}

#[test]
fn step_halving_is_stable_on_check_stages() {
    let cfg = EvaluationConfig {
        check_convergence: true,
        ..Default::default()
    };
    for id in [CheckId::Check2a, CheckId::Check5] {
        let report = run_check(id).unwrap();
        let oracle = Oracle {
            cfg,
            ..Oracle::default().with_relations(&report.relations)
        };
        assert!(oracle.assert_zero(report.difference(), 3).unwrap().passed);
    }
}

#[test]
fn generated_reduction_identities_hold_numerically() {
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t"]).unwrap().remove(0);
    let xs = ctx.space_vars(&["u", "v1", "v2", "v3", "v4", "v5"]).unwrap();
    let a = ctx.functions(&["A"]).unwrap().remove(0);
    for k in 1..=6 {
        let (lhs, rhs) = reduction_identity(k).instantiate(&a, &t, &xs[0], &xs[1..k]);
        let z = Oracle::default()
            .with_seed(k as u64)
            .assert_zero(&(lhs - rhs), 10)
            .unwrap();
        assert!(z.passed, "order {k}: {z:?}");
    }
}

#[test]
fn variational_derivative_matches_central_differences() {
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t"]).unwrap().remove(0);
    let x = ctx.space_vars(&["u", "v", "w"]).unwrap();
    let a = ctx.functions(&["A"]).unwrap().remove(0);
    let first = flow(&a, &t, &x[0], &[x[1].clone()]).unwrap();
    let second = flow(&a, &t, &x[0], &[x[1].clone(), x[2].clone()]).unwrap();
    let cfg = EvaluationConfig::default();
    let oracle = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    for _ in 0..10 {
        let b = oracle.sample(&second, &mut rng).unwrap();
        let (tau, u, v) = (b.times["t"], &b.points["u"], &b.points["v"]);
        let f = &b.fields["A"];
        let steps = (tau.abs() * 1024.0).ceil().max(1.0) as usize;
        let shifted = |s: f64| -> Vec<f64> {
            let y0: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + s * b).collect();
            integrate(f, &y0, tau, steps)
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        let fd: Vec<f64> = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let var = evaluate(&first, &b, &cfg).unwrap();
        let err = max_norm(&var.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(
            err <= 1e-4 * max_norm(&var).max(1.0),
            "first order: {var:?} vs {fd:?}"
        );

        let nested = EvaluationConfig {
            flow_derivative: FlowDerivative::FiniteDifference { h: 1e-4 },
            ..cfg
        };
        let exact = evaluate(&second, &b, &cfg).unwrap();
        let approx = evaluate(&second, &b, &nested).unwrap();
        let err = max_norm(&exact.iter().zip(&approx).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(
            err <= 1e-4 * max_norm(&exact).max(1.0),
            "second order: {exact:?} vs {approx:?}"
        );
    }
}

fn rotation_error(steps: usize) -> f64 {
    let f = ConcreteVectorField::parse(&["x2", "-x1", "0"], false).unwrap();
    let tau = 1.0f64;
    let y = integrate(&f, &[1.0, 0.5, 0.0], tau, steps);
    let exact = [tau.cos() + 0.5 * tau.sin(), -tau.sin() + 0.5 * tau.cos(), 0.0];
    max_norm(&[y[0] - exact[0], y[1] - exact[1], y[2] - exact[2]])
}

#[test]
fn integrator_is_fourth_order() {
    for n in [8, 16, 32] {
        let ratio = rotation_error(n) / rotation_error(2 * n);
        assert!((ratio - 16.0).abs() <= 4.0, "{n} steps: ratio {ratio}");
    }
}

#[test]
fn jacobi_sum_vanishes_to_round_off() {
    let report = run_check(CheckId::Jacobi).unwrap();
    let mut oracle = Oracle::default().with_seed(3);
    oracle.cfg.tolerance = 1e-8;
    let z = oracle.assert_zero(report.difference(), 10).unwrap();
    assert!(z.passed, "{z:?}");
}

#[test]
fn nonzero_canonical_forms_are_detected() {
    let mut runner = TestRunner::deterministic();
    let strategy = common::gen::generic_expr();
    let mut checked = 0;
    while checked < 100 {
        let x = strategy.new_tree(&mut runner).unwrap().current().canonicalize();
        if x.is_zero() {
            continue;
        }
        let z = Oracle::default().with_seed(checked).assert_zero(&x, 10).unwrap();
        assert!(!z.passed, "{} evaluated to zero: {z:?}", to_text(&x));
        checked += 1;
    }
}
