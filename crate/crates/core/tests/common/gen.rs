//! Random expressions over a fixed symbol set.

use std::sync::OnceLock;

use flowsym::{apply, flow, nonautonomous_apply, Context, Expr, FunctionSymbol, Rational, TimeExpr};
use num::BigInt;
use proptest::prelude::*;

pub struct Symbols {
    pub ctx: Context,
    pub t: TimeExpr,
    pub s: TimeExpr,
    pub u: Expr,
    pub v: Expr,
    pub w: Expr,
    /// A, B, C
    pub funs: Vec<FunctionSymbol>,
    /// nonautonomous S
    pub s_fun: FunctionSymbol,
}

pub fn symbols() -> &'static Symbols {
    static SYMS: OnceLock<Symbols> = OnceLock::new();
    SYMS.get_or_init(|| {
        let mut ctx = Context::new();
        let ts = ctx.time_vars(&["t", "s"]).unwrap();
        let xs = ctx.space_vars(&["u", "v", "w"]).unwrap();
        let funs = ctx.functions(&["A", "B", "C"]).unwrap();
        let s_fun = ctx.nonautonomous_functions(&["S"]).unwrap().remove(0);
        Symbols {
            ctx,
            t: ts[0].clone(),
            s: ts[1].clone(),
            u: xs[0].clone(),
            v: xs[1].clone(),
            w: xs[2].clone(),
            funs,
            s_fun,
        }
    })
}

pub fn coeff() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn time() -> impl Strategy<Value = TimeExpr> {
    let s = symbols();
    (-2i64..=2, -2i64..=2).prop_map(move |(a, b)| a * s.t.clone() + b * s.s.clone())
}

/// Nonzero single-variable times.
fn simple_time() -> impl Strategy<Value = TimeExpr> {
    let s = symbols();
    prop_oneof![
        Just(s.t.clone()),
        Just(s.s.clone()),
        Just(s.t.clone() + s.s.clone())
    ]
}

fn variable() -> impl Strategy<Value = Expr> {
    let s = symbols();
    prop_oneof![Just(s.u.clone()), Just(s.v.clone()), Just(s.w.clone())]
}

fn combination(inner: BoxedStrategy<Expr>) -> impl Strategy<Value = Expr> {
    prop::collection::vec((inner, coeff()), 1..=3)
        .prop_map(|ts| ts.into_iter().map(|(e, c)| c * e).sum::<Expr>())
}

/// Any expression: applications, flows of A and B with arbitrary times,
/// nonautonomous S, and linear combinations, nested up to depth 4.
/// Applications are left unnormalized.
pub fn expr() -> BoxedStrategy<Expr> {
    let s = symbols();
    variable()
        .prop_recursive(4, 40, 3, move |inner| {
            prop_oneof![
                (
                    0..3usize,
                    inner.clone(),
                    prop::collection::vec(inner.clone(), 0..=2)
                )
                    .prop_map(move |(f, b, sl)| apply(&s.funs[f], &b, &sl).unwrap()),
                (
                    0..2usize,
                    time(),
                    inner.clone(),
                    prop::collection::vec(inner.clone(), 0..=2)
                )
                    .prop_map(move |(f, t, b, sl)| flow(&s.funs[f], &t, &b, &sl).unwrap()),
                (
                    0..=2u32,
                    time(),
                    inner.clone(),
                    prop::collection::vec(inner.clone(), 0..=1)
                )
                    .prop_map(move |(m, t, b, sl)| nonautonomous_apply(&s.s_fun, m, &t, &b, &sl).unwrap()),
                combination(inner),
            ]
        })
        .boxed()
}

/// Directions free of `u`, for differentials with respect to `u`.
pub fn direction() -> BoxedStrategy<Expr> {
    let s = symbols();
    let leaf = prop_oneof![Just(s.v.clone()), Just(s.w.clone())];
    leaf.prop_recursive(2, 8, 2, move |inner| {
        prop_oneof![
            (
                1..3usize,
                inner.clone(),
                prop::collection::vec(inner.clone(), 0..=1)
            )
                .prop_map(move |(f, b, sl)| apply(&s.funs[f], &b, &sl).unwrap()),
            combination(inner),
        ]
    })
    .boxed()
}

/// Expressions with no hidden identities between distinct canonical
/// terms: B and C are applied, only A flows, flow bases are variables and
/// flow times are nonzero, derivative orders stay below the field degree.
pub fn generic_expr() -> BoxedStrategy<Expr> {
    let s = symbols();
    let flows = (
        simple_time(),
        variable(),
        prop::collection::vec(variable(), 0..=1),
    )
        .prop_map(move |(t, b, sl)| flow(&s.funs[0], &t, &b, &sl).unwrap());
    let leaf = prop_oneof![variable(), flows];
    leaf.prop_recursive(2, 10, 2, move |inner| {
        prop_oneof![
            (
                1..3usize,
                inner.clone(),
                prop::collection::vec(inner.clone(), 0..=1)
            )
                .prop_map(move |(f, b, sl)| apply(&s.funs[f], &b, &sl).unwrap()),
            (
                0..=1u32,
                simple_time(),
                inner.clone(),
                prop::collection::vec(inner.clone(), 0..=1)
            )
                .prop_map(move |(m, t, b, sl)| nonautonomous_apply(&s.s_fun, m, &t, &b, &sl).unwrap()),
            combination(inner),
        ]
    })
    .boxed()
}
