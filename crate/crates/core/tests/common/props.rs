//! Property checks shared by the property test target and the acceptance
//! report. Each runs a deterministic proptest runner for `cases` cases.

use flowsym::calculus::{differential, expand};
use flowsym::render::{parse, to_latex, to_prefix, to_text};
use flowsym::scenarios::jacobi_sum;
use flowsym::{Expr, ExprKind, Expression};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use super::gen::{coeff, direction, expr, symbols};

pub type Property = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Property); 7] = [
    ("canonicalize idempotence", canonicalize_idempotent),
    ("expand idempotence", expand_idempotent),
    ("differential linearity", differential_linear),
    ("second-derivative symmetry", second_derivative_symmetric),
    ("slot-permutation invariance", slot_permutation_invariant),
    ("Jacobi identity", jacobi),
    ("serialization round trip", round_trip),
];

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn canonicalize_idempotent(cases: u32) -> Result<(), String> {
    run(cases, expr(), |x| {
        let c = x.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!(x.equivalent(&c));
        Ok(())
    })
}

pub fn expand_idempotent(cases: u32) -> Result<(), String> {
    run(cases, expr(), |x| {
        let e = expand(&x);
        prop_assert_eq!(expand(&e), e);
        Ok(())
    })
}

pub fn differential_linear(cases: u32) -> Result<(), String> {
    let s = symbols();
    run(
        cases,
        (expr(), direction(), direction(), coeff(), coeff()),
        |(x, p, q, a, b)| {
            let mixed = a.clone() * p.clone() + b.clone() * q.clone();
            let lhs = expand(&differential(&x, &s.u, &mixed).unwrap());
            let rhs = a * differential(&x, &s.u, &p).unwrap() + b * differential(&x, &s.u, &q).unwrap();
            prop_assert_eq!(lhs, expand(&rhs));
            Ok(())
        },
    )
}

pub fn second_derivative_symmetric(cases: u32) -> Result<(), String> {
    let s = symbols();
    run(cases, (expr(), direction(), direction()), |(x, p, q)| {
        let d = |a: &Expr, b: &Expr| {
            let once = differential(&x, &s.u, a).unwrap();
            expand(&differential(&once, &s.u, b).unwrap())
        };
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        Ok(())
    })
}

/// Rebuilds an application with permuted derivative slots.
fn permute_slots(x: &Expr, perm: &[usize]) -> Option<Expr> {
    let (fun_base, slots) = x.kind().base_and_slots()?;
    if slots.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..slots.len()).collect();
    for (i, &p) in perm.iter().enumerate().take(slots.len()) {
        order.swap(i, p % slots.len());
    }
    let permuted: Vec<Expr> = order.iter().map(|&i| slots[i].clone()).collect();
    Some(match x.kind() {
        ExprKind::Function { fun, .. } => flowsym::apply(fun, fun_base, &permuted).unwrap(),
        ExprKind::Flow { fun, time, .. } => flowsym::flow(fun, time, fun_base, &permuted).unwrap(),
        ExprKind::NonAutonomous {
            fun, t_order, time, ..
        } => flowsym::nonautonomous_apply(fun, *t_order, time, fun_base, &permuted).unwrap(),
        _ => unreachable!(),
    })
}

pub fn slot_permutation_invariant(cases: u32) -> Result<(), String> {
    let s = symbols();
    let multi = (
        0..4usize,
        super::gen::time(),
        expr(),
        prop::collection::vec(expr(), 2..=3),
        prop::collection::vec(0..3usize, 3),
    )
        .prop_map(move |(k, t, b, sl, perm)| {
            let x = match k {
                0 | 1 => flowsym::apply(&s.funs[k], &b, &sl).unwrap(),
                2 => flowsym::flow(&s.funs[0], &t, &b, &sl).unwrap(),
                _ => flowsym::nonautonomous_apply(&s.s_fun, 1, &t, &b, &sl).unwrap(),
            };
            (x, perm)
        });
    run(cases, multi, |(x, perm)| {
        let y = permute_slots(&x, &perm).unwrap();
        prop_assert_eq!(x.canonicalize(), y.canonicalize());
        Ok(())
    })
}

pub fn jacobi(cases: u32) -> Result<(), String> {
    let s = symbols();
    for a in &s.funs {
        for b in &s.funs {
            for c in &s.funs {
                let sum = jacobi_sum(a, b, c, &s.u).map_err(|e| e.to_string())?;
                if !expand(&sum).is_zero() {
                    return Err(format!("Jacobi sum for ({a},{b},{c}) is not zero"));
                }
            }
        }
    }
    run(
        cases,
        (0..3usize, 0..3usize, 0..3usize, expr()),
        |(i, j, k, base)| {
            let sum = jacobi_sum(&s.funs[i], &s.funs[j], &s.funs[k], &base).unwrap();
            prop_assert!(expand(&sum).is_zero());
            Ok(())
        },
    )
}

pub fn round_trip(cases: u32) -> Result<(), String> {
    let s = symbols();
    run(cases, expr(), |x| {
        let c = x.canonicalize();
        let from_prefix = parse(&to_prefix(&c), &s.ctx).unwrap();
        prop_assert_eq!(from_prefix, Expression::Space(c.clone()));
        let from_text = parse(&to_text(&c), &s.ctx).unwrap().canonicalize();
        prop_assert_eq!(from_text, Expression::Space(c.clone()));
        prop_assert_eq!(to_latex(&c), to_latex(&x.canonicalize()));
        Ok(())
    })
}
