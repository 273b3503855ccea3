//! Executable identity checks for the Lie-Trotter splitting defect, the
//! Jacobi identity, and elementary-differential counting.
//!
//! Each check declares its own [`Context`], builds both sides of an
//! identity, and reduces their difference with a fixed pipeline of
//! operations. A check passes iff the residual is the zero expression.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::calculus::{
    commutator, commutator3, differential, expand, substitute, substitute_fun, t_derivative,
};
use crate::error::{Error, Result};
use crate::expr::{apply, flow, nonautonomous_apply, Context, Expr, FunctionSymbol, TimeExpr};
use crate::render::to_text;
use crate::rewrite::{RewriteConfig, Rewriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    Check1,
    Check2,
    Check2a,
    Check3,
    Check4,
    Check5,
    Jacobi,
}

impl CheckId {
    pub const ALL: [CheckId; 7] = [
        CheckId::Check1,
        CheckId::Check2,
        CheckId::Check2a,
        CheckId::Check3,
        CheckId::Check4,
        CheckId::Check5,
        CheckId::Jacobi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Check1 => "check1",
            CheckId::Check2 => "check2",
            CheckId::Check2a => "check2a",
            CheckId::Check3 => "check3",
            CheckId::Check4 => "check4",
            CheckId::Check5 => "check5",
            CheckId::Jacobi => "jacobi",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidContext(format!("unknown check `{s}`")))
    }
}

/// A function symbol that stands for the sum of others, e.g. `H = A + B`.
/// Numeric evaluation of a report must bind fields accordingly.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub fun: FunctionSymbol,
    pub sum_of: Vec<FunctionSymbol>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: CheckId,
    pub residual: Expr,
    pub passed: bool,
    /// Operation name and its output, starting with the raw difference.
    pub steps: Vec<(String, Expr)>,
    pub relations: Vec<Relation>,
    pub context: Context,
}

impl CheckReport {
    /// The difference of both sides before any rewriting.
    pub fn difference(&self) -> &Expr {
        &self.steps[0].1
    }

    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            version: REPORT_VERSION,
            id: self.id.as_str().to_string(),
            passed: self.passed,
            residual_terms: self.residual.term_count(),
            residual: to_text(&self.residual),
            steps: self.steps.iter().map(|(s, _)| s.clone()).collect(),
        }
    }
}

pub const REPORT_VERSION: &str = "flowsym-report/1";

/// One line of the `verify` output stream.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub version: &'static str,
    pub id: String,
    pub passed: bool,
    pub residual_terms: usize,
    pub residual: String,
    pub steps: Vec<String>,
}

/// The named expressions of the Lie-Trotter splitting `E_B(t, E_A(t,u))`.
#[derive(Debug, Clone)]
pub struct LieTrotter {
    pub t: TimeExpr,
    pub u: Expr,
    pub v: Expr,
    pub w: Expr,
    pub a: FunctionSymbol,
    pub b: FunctionSymbol,
    /// `E_B(t, E_A(t,u))`.
    pub s: Expr,
    /// `d2E_B(t,v).A(v) - A(E_B(t,v))`.
    pub s1_tilde: Expr,
    /// `s1_tilde` at `v = E_A(t,u)`.
    pub s1: Expr,
    /// `d2 s1_tilde(t,v).A(v) - A'(E_B(t,v)).s1_tilde + [B,A](E_B(t,v))`.
    pub s2_tilde: Expr,
    /// `d_t s1 - A'(s).s1 - B'(s).s1`.
    pub s2: Expr,
}

/// Builds the splitting and its defects from `t`, `u`, `v`, `w`, `A`, `B`
/// declared in `ctx`.
pub fn build_lie_trotter(ctx: &Context) -> Result<LieTrotter> {
    let t = ctx.time_var("t")?;
    let u = ctx.space_var("u")?;
    let v = ctx.space_var("v")?;
    let w = ctx.space_var("w")?;
    let a = ctx.function("A")?;
    let b = ctx.function("B")?;
    let e_at = flow(&a, &t, &u, &[])?;
    let e_bv = flow(&b, &t, &v, &[])?;
    let s = flow(&b, &t, &e_at, &[])?.canonicalize();
    let av = apply(&a, &v, &[])?;
    let s1_tilde = differential(&e_bv, &v, &av)? - apply(&a, &e_bv, &[])?;
    let s1 = substitute(&s1_tilde, &v, &e_at)?;
    let s2 = t_derivative(&s1, &t)? - apply(&a, &s, &[s1.clone()])? - apply(&b, &s, &[s1.clone()])?;
    let s2_tilde = differential(&s1_tilde, &v, &av)? - apply(&a, &e_bv, &[s1_tilde.clone()])?
        + commutator(&b, &a, &e_bv)?;
    Ok(LieTrotter {
        t,
        u,
        v,
        w,
        a,
        b,
        s,
        s1_tilde,
        s1,
        s2_tilde,
        s2,
    })
}

/// A context with `t`, `u`, `v`, `w`, `A`, `B` declared.
pub fn lie_trotter_context() -> Context {
    let mut ctx = Context::new();
    ctx.time_vars(&["t"]).expect("fresh context");
    ctx.space_vars(&["u", "v", "w"]).expect("fresh context");
    ctx.functions(&["A", "B"]).expect("fresh context");
    ctx
}

/// `E_B(t/2, E_A(t, E_B(t/2, u)))`.
pub fn build_strang(ctx: &Context) -> Result<Expr> {
    let t = ctx.time_var("t")?;
    let u = ctx.space_var("u")?;
    let a = ctx.function("A")?;
    let b = ctx.function("B")?;
    let half = t.scale(&crate::expr::Rational::new(1.into(), 2.into()));
    let inner = flow(&b, &half, &u, &[])?;
    let mid = flow(&a, &t, &inner, &[])?;
    Ok(flow(&b, &half, &mid, &[])?.canonicalize())
}

struct Pipeline {
    rw: Rewriter,
    steps: Vec<(String, Expr)>,
}

impl Pipeline {
    fn new(cfg: &RewriteConfig, difference: Expr) -> Self {
        Self {
            rw: Rewriter::new(*cfg),
            steps: vec![("difference".into(), difference.canonicalize())],
        }
    }

    fn current(&self) -> &Expr {
        &self.steps.last().expect("non-empty").1
    }

    fn step(&mut self, name: &str, f: impl FnOnce(&mut Rewriter, &Expr) -> Result<Expr>) -> Result<()> {
        let cur = self.current().clone();
        let next = f(&mut self.rw, &cur)?;
        self.steps.push((name.to_string(), next));
        Ok(())
    }

    fn expand(&mut self) -> Result<()> {
        self.step("expand", |_, e| Ok(expand(e)))
    }

    fn reduce_order(&mut self) -> Result<()> {
        self.step("reduce_order", |rw, e| rw.reduce_order(e))
    }

    fn report(self, id: CheckId, context: Context, relations: Vec<Relation>) -> CheckReport {
        let residual = self.current().clone();
        CheckReport {
            id,
            passed: residual.is_zero(),
            residual,
            steps: self.steps,
            relations,
            context,
        }
    }
}

/// Runs a check with the default rewrite configuration.
pub fn run_check(id: CheckId) -> Result<CheckReport> {
    run_check_with(id, &RewriteConfig::default())
}

pub fn run_check_with(id: CheckId, cfg: &RewriteConfig) -> Result<CheckReport> {
    match id {
        CheckId::Check1 => check1(cfg),
        CheckId::Check2 => check2(cfg),
        CheckId::Check2a => check2a(cfg),
        CheckId::Check3 => check3(cfg),
        CheckId::Check4 => check4(cfg),
        CheckId::Check5 => check5(cfg),
        CheckId::Jacobi => jacobi(cfg),
    }
}

/// The Jacobi check with the default configuration.
pub fn run_jacobi() -> Result<CheckReport> {
    run_check(CheckId::Jacobi)
}

fn check1(cfg: &RewriteConfig) -> Result<CheckReport> {
    let ctx = lie_trotter_context();
    let lt = build_lie_trotter(&ctx)?;
    let ex1 = lt.s1.clone();
    let ex2 = t_derivative(&lt.s, &lt.t)? - apply(&lt.a, &lt.s, &[])? - apply(&lt.b, &lt.s, &[])?;
    Ok(Pipeline::new(cfg, ex1 - ex2).report(CheckId::Check1, ctx, Vec::new()))
}

fn check2(cfg: &RewriteConfig) -> Result<CheckReport> {
    let ctx = lie_trotter_context();
    let lt = build_lie_trotter(&ctx)?;
    let e_bv = flow(&lt.b, &lt.t, &lt.v, &[])?;
    let ex1 = apply(&lt.b, &e_bv, &[lt.s1_tilde.clone()])? + commutator(&lt.b, &lt.a, &e_bv)?;
    let ex2 = t_derivative(&lt.s1_tilde, &lt.t)?;
    let mut p = Pipeline::new(cfg, ex1 - ex2);
    p.expand()?;
    p.reduce_order()?;
    Ok(p.report(CheckId::Check2, ctx, Vec::new()))
}

fn check2a(cfg: &RewriteConfig) -> Result<CheckReport> {
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t", "T"])?;
    let (t, big_t) = (t[0].clone(), t[1].clone());
    let u = ctx.space_vars(&["u"])?.remove(0);
    let s = ctx.nonautonomous_functions(&["S"])?.remove(0);
    let h = ctx.functions(&["H"])?.remove(0);
    let stu = nonautonomous_apply(&s, 0, &t, &u, &[])?;
    let s1 = t_derivative(&stu, &t)? - apply(&h, &stu, &[])?;
    let s2 = t_derivative(&s1, &t)? - apply(&h, &stu, &[s1.clone()])?;
    let tau = big_t - t.clone();
    let ex1 = flow(&h, &tau, &stu, &[s2])? + flow(&h, &tau, &stu, &[s1.clone(), s1.clone()])?;
    let ex2 = t_derivative(&flow(&h, &tau, &stu, &[s1])?, &t)?;
    let mut p = Pipeline::new(cfg, ex1 - ex2);
    p.expand()?;
    p.reduce_order()?;
    Ok(p.report(CheckId::Check2a, ctx, Vec::new()))
}

fn check3(cfg: &RewriteConfig) -> Result<CheckReport> {
    let ctx = lie_trotter_context();
    let lt = build_lie_trotter(&ctx)?;
    let e_at = flow(&lt.a, &lt.t, &lt.u, &[])?;
    let ex1 = lt.s2.clone();
    let ex2 = substitute(&lt.s2_tilde, &lt.v, &e_at)?;
    let mut p = Pipeline::new(cfg, ex1 - ex2);
    p.expand()?;
    Ok(p.report(CheckId::Check3, ctx, Vec::new()))
}

fn check4(cfg: &RewriteConfig) -> Result<CheckReport> {
    let ctx = lie_trotter_context();
    let lt = build_lie_trotter(&ctx)?;
    let (a, b, w) = (&lt.a, &lt.b, &lt.w);
    let e_bv = flow(b, &lt.t, &lt.v, &[])?;
    let dba = differential(&commutator(b, a, w)?, w, &lt.s1_tilde)?;
    let ex1 = apply(b, &e_bv, &[lt.s2_tilde.clone()])?
        + apply(b, &e_bv, &[lt.s1_tilde.clone(), lt.s1_tilde.clone()])?
        - commutator3(b, b, a, &e_bv)?
        - commutator3(a, b, a, &e_bv)?
        + substitute(&dba, w, &e_bv)? * 2;
    let ex2 = t_derivative(&lt.s2_tilde, &lt.t)?;
    let mut p = Pipeline::new(cfg, ex1 - ex2);
    p.expand()?;
    Ok(p.report(CheckId::Check4, ctx, Vec::new()))
}

fn check5(cfg: &RewriteConfig) -> Result<CheckReport> {
    let mut ctx = lie_trotter_context();
    let big_t = ctx.time_vars(&["T"])?.remove(0);
    let h = ctx.functions(&["H"])?.remove(0);
    let lt = build_lie_trotter(&ctx)?;
    let (a, b, t, u, v) = (&lt.a, &lt.b, &lt.t, &lt.u, &lt.v);
    let tau = big_t - t.clone();
    let e_at = flow(a, t, u, &[])?;
    let e_bv = flow(b, t, v, &[])?;
    let inner = flow(b, t, &e_at, &[commutator(b, a, &e_at)?])?;
    let ex1 = t_derivative(&flow(&h, &tau, &lt.s, &[inner])?, t)?;
    let ba_v = commutator(b, a, v)?;
    let rhs = -flow(&h, &tau, &e_bv, &[flow(b, t, v, &[commutator3(a, b, a, v)?])?])?
        + flow(&h, &tau, &e_bv, &[differential(&lt.s1_tilde, v, &ba_v)?])?
        + flow(
            &h,
            &tau,
            &e_bv,
            &[lt.s1_tilde.clone(), flow(b, t, v, &[ba_v.clone()])?],
        )?;
    let ex2 = substitute(&rhs, v, &e_at)?;
    let mut p = Pipeline::new(cfg, ex1 - ex2);
    p.step("fe2def", |rw, e| rw.fe2def(e))?;
    let sum = apply(a, v, &[])? + apply(b, v, &[])?;
    p.step("substitute_fun", |_, e| Ok(substitute_fun(e, &h, &sum, v)?.expr))?;
    p.reduce_order()?;
    p.expand()?;
    let relations = vec![Relation {
        fun: h,
        sum_of: vec![a.clone(), b.clone()],
    }];
    Ok(p.report(CheckId::Check5, ctx, relations))
}

fn jacobi(cfg: &RewriteConfig) -> Result<CheckReport> {
    let mut ctx = Context::new();
    let u = ctx.space_vars(&["u"])?.remove(0);
    let f = ctx.functions(&["A", "B", "C"])?;
    let ex = jacobi_sum(&f[0], &f[1], &f[2], &u)?;
    let mut p = Pipeline::new(cfg, ex);
    p.expand()?;
    Ok(p.report(CheckId::Jacobi, ctx, Vec::new()))
}

/// `[A,[B,C]](u) + [B,[C,A]](u) + [C,[A,B]](u)`, unexpanded.
pub fn jacobi_sum(a: &FunctionSymbol, b: &FunctionSymbol, c: &FunctionSymbol, u: &Expr) -> Result<Expr> {
    Ok(commutator3(a, b, c, u)? + commutator3(b, c, a, u)? + commutator3(c, a, b, u)?)
}

/// Successive time derivatives of `E_F(t,u)`, yielding `(order, term count)`.
pub struct ElementaryDifferentials {
    t: TimeExpr,
    current: Expr,
    order: usize,
}

impl ElementaryDifferentials {
    pub fn new() -> Self {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t"]).expect("fresh context").remove(0);
        let u = ctx.space_vars(&["u"]).expect("fresh context").remove(0);
        let f = ctx.functions(&["F"]).expect("fresh context").remove(0);
        let current = flow(&f, &t, &u, &[]).expect("autonomous").canonicalize();
        Self { t, current, order: 0 }
    }

    /// The expression of the most recently yielded order.
    pub fn current(&self) -> &Expr {
        &self.current
    }
}

impl Default for ElementaryDifferentials {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ElementaryDifferentials {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        let d = t_derivative(&self.current, &self.t).expect("t is a time variable");
        self.current = expand(&d);
        self.order += 1;
        Some((self.order, self.current.term_count()))
    }
}

/// Term counts of the first `max_order` time derivatives of a flow.
pub fn count_elementary_differentials(max_order: usize) -> Vec<(usize, usize)> {
    ElementaryDifferentials::new().take(max_order).collect()
}

/// Term counts printed in the reference table for orders 1 to 16.
pub const REFERENCE_COUNTS: [usize; 16] = [
    1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766, 12486, 32973, 87811, 235381,
];
