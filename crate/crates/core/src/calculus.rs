//! Derivative calculus: Frechet differential, time derivative, multilinear
//! expansion, substitution and commutators.
//!
//! Every public function returns its result in canonical form.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num::One;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprKind, FunctionSymbol, Rational, TimeExpr};

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A name that cannot collide with any declared identifier.
pub(crate) fn fresh_name(prefix: &str) -> Arc<str> {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Arc::from(format!("%{prefix}{n}"))
}

pub(crate) fn fresh_var(prefix: &str) -> Expr {
    Expr::variable(fresh_name(prefix))
}

fn space_variable(x: &Expr) -> Result<&str> {
    x.as_variable()
        .ok_or_else(|| Error::InvalidVariable(format!("`{x}` is not a space variable")))
}

fn time_variable(t: &TimeExpr) -> Result<&str> {
    t.as_variable()
        .ok_or_else(|| Error::InvalidVariable(format!("`{t}` is not a time variable")))
}

/// Chain-rule terms of an application node: the base derivative appended as
/// a new slot, plus one term per slot replaced by its own derivative.
fn chain_terms(node: &Expr, mut d: impl FnMut(&Expr) -> Expr) -> Vec<Expr> {
    let (base, slots) = node
        .kind()
        .base_and_slots()
        .expect("chain rule applies to application nodes");
    let mut out = Vec::with_capacity(slots.len() + 1);
    let db = d(base);
    if !db.is_zero() {
        let mut s = slots.to_vec();
        s.push(db);
        out.push(node.with_children(base.clone(), s));
    }
    for i in 0..slots.len() {
        let ds = d(&slots[i]);
        if !ds.is_zero() {
            let mut s = slots.to_vec();
            s[i] = ds;
            out.push(node.with_children(base.clone(), s));
        }
    }
    out
}

struct Differential<'a> {
    var: &'a str,
    dir: &'a Expr,
    memo: HashMap<Expr, Expr>,
}

impl Differential<'_> {
    fn run(&mut self, ex: &Expr) -> Expr {
        if let Some(r) = self.memo.get(ex) {
            return r.clone();
        }
        let r = match ex.kind() {
            ExprKind::Variable(n) if &**n == self.var => self.dir.clone(),
            ExprKind::Variable(_) => Expr::zero(),
            ExprKind::Combination(terms) => {
                Expr::combination(terms.iter().map(|(e, c)| (self.run(e), c.clone())).collect())
            }
            _ => Expr::sum(chain_terms(ex, |e| self.run(e))),
        };
        self.memo.insert(ex.clone(), r.clone());
        r
    }
}

/// Frechet derivative of a canonical expression with respect to `var` in
/// direction `dir`. The direction itself is never differentiated.
pub(crate) fn diff(ex: &Expr, var: &str, dir: &Expr) -> Expr {
    Differential {
        var,
        dir,
        memo: HashMap::new(),
    }
    .run(ex)
}

/// `d/de ex[x <- x + e v]` at `e = 0`.
pub fn differential(ex: &Expr, x: &Expr, v: &Expr) -> Result<Expr> {
    let var = space_variable(x)?;
    Ok(diff(&ex.canonicalize(), var, &v.canonicalize()))
}

/// `d_tau d2^k E_F(tau, base)(d1..dk)`, obtained by differentiating
/// `F(E_F(tau, x))` k times in x and evaluating at `x = base`.
fn flow_time_rule(fun: &FunctionSymbol, time: &TimeExpr, base: &Expr, slots: &[Expr]) -> Expr {
    if slots.is_empty() {
        let e = Expr::flow(fun.clone(), time.clone(), base.clone(), Vec::new());
        return Expr::function(fun.clone(), e, Vec::new());
    }
    let hole_name = fresh_name("h");
    let hole = Expr::variable(hole_name.clone());
    let e = Expr::flow(fun.clone(), time.clone(), hole, Vec::new());
    let mut g = Expr::function(fun.clone(), e, Vec::new());
    for d in slots {
        g = diff(&g, &hole_name, d);
    }
    subst(&g, &hole_name, base)
}

struct TimeDerivative<'a> {
    var: &'a str,
    memo: HashMap<Expr, Expr>,
}

impl TimeDerivative<'_> {
    fn run(&mut self, ex: &Expr) -> Expr {
        if let Some(r) = self.memo.get(ex) {
            return r.clone();
        }
        let r = match ex.kind() {
            ExprKind::Variable(_) => Expr::zero(),
            ExprKind::Combination(terms) => {
                Expr::combination(terms.iter().map(|(e, c)| (self.run(e), c.clone())).collect())
            }
            ExprKind::Function { .. } => Expr::sum(chain_terms(ex, |e| self.run(e))),
            ExprKind::Flow {
                fun,
                time,
                base,
                slots,
            } => {
                let c = time.coefficient(self.var);
                let mut terms: Vec<(Expr, Rational)> = chain_terms(ex, |e| self.run(e))
                    .into_iter()
                    .map(|e| (e, Rational::one()))
                    .collect();
                if c != Rational::from_integer(0.into()) {
                    terms.push((flow_time_rule(fun, time, base, slots), c));
                }
                Expr::combination(terms)
            }
            ExprKind::NonAutonomous {
                fun,
                t_order,
                time,
                base,
                slots,
            } => {
                let c = time.coefficient(self.var);
                let mut terms: Vec<(Expr, Rational)> = chain_terms(ex, |e| self.run(e))
                    .into_iter()
                    .map(|e| (e, Rational::one()))
                    .collect();
                if c != Rational::from_integer(0.into()) {
                    let bumped = Expr::nonautonomous(
                        fun.clone(),
                        t_order + 1,
                        time.clone(),
                        base.clone(),
                        slots.clone(),
                    );
                    terms.push((bumped, c));
                }
                Expr::combination(terms)
            }
        };
        self.memo.insert(ex.clone(), r.clone());
        r
    }
}

pub(crate) fn tdiff(ex: &Expr, var: &str) -> Expr {
    TimeDerivative {
        var,
        memo: HashMap::new(),
    }
    .run(ex)
}

/// Derivative with respect to the time variable `t`.
///
/// Flows follow `d_t E_F(t,u) = F(E_F(t,u))`, lifted through derivative slots
/// by repeated differentiation; nonautonomous nodes gain one order in their
/// first argument.
pub fn t_derivative(ex: &Expr, t: &TimeExpr) -> Result<Expr> {
    let var = time_variable(t)?;
    Ok(tdiff(&ex.canonicalize(), var))
}

struct Expander {
    memo: HashMap<Expr, Expr>,
}

impl Expander {
    fn run(&mut self, ex: &Expr) -> Expr {
        if let Some(r) = self.memo.get(ex) {
            return r.clone();
        }
        let r = match ex.kind() {
            ExprKind::Variable(_) => ex.clone(),
            ExprKind::Combination(terms) => {
                Expr::combination(terms.iter().map(|(e, c)| (self.run(e), c.clone())).collect())
            }
            _ => {
                let (base, slots) = ex.kind().base_and_slots().expect("application");
                let base = self.run(base);
                let slot_terms: Vec<Vec<(Expr, Rational)>> = slots
                    .iter()
                    .map(|s| {
                        let s = self.run(s);
                        if s.is_zero() {
                            Vec::new()
                        } else {
                            s.terms()
                        }
                    })
                    .collect();
                let mut out: Vec<(Expr, Rational)> = Vec::new();
                let mut choice: Vec<Expr> = Vec::with_capacity(slots.len());
                product(&slot_terms, 0, &mut choice, Rational::one(), &mut |slots, c| {
                    out.push((ex.with_children(base.clone(), slots.to_vec()), c));
                });
                Expr::combination(out)
            }
        };
        self.memo.insert(ex.clone(), r.clone());
        r
    }
}

fn product(
    lists: &[Vec<(Expr, Rational)>],
    i: usize,
    choice: &mut Vec<Expr>,
    coeff: Rational,
    emit: &mut impl FnMut(&[Expr], Rational),
) {
    if i == lists.len() {
        emit(choice, coeff);
        return;
    }
    for (e, c) in &lists[i] {
        choice.push(e.clone());
        product(lists, i + 1, choice, &coeff * c, emit);
        choice.pop();
    }
}

/// Distributes every derivative slot over linear combinations. Bases of
/// applications are left alone.
pub fn expand(ex: &Expr) -> Expr {
    Expander { memo: HashMap::new() }.run(&ex.canonicalize())
}

pub(crate) fn subst(ex: &Expr, var: &str, repl: &Expr) -> Expr {
    match ex.kind() {
        ExprKind::Variable(n) if &**n == var => repl.clone(),
        ExprKind::Variable(_) => ex.clone(),
        ExprKind::Combination(terms) => Expr::combination(
            terms
                .iter()
                .map(|(e, c)| (subst(e, var, repl), c.clone()))
                .collect(),
        ),
        _ => {
            let (base, slots) = ex.kind().base_and_slots().expect("application");
            ex.with_children(
                subst(base, var, repl),
                slots.iter().map(|s| subst(s, var, repl)).collect(),
            )
        }
    }
}

pub(crate) fn subst_time(ex: &Expr, var: &str, repl: &TimeExpr) -> Expr {
    match ex.kind() {
        ExprKind::Variable(_) => ex.clone(),
        ExprKind::Combination(terms) => Expr::combination(
            terms
                .iter()
                .map(|(e, c)| (subst_time(e, var, repl), c.clone()))
                .collect(),
        ),
        ExprKind::Function { fun, base, slots } => Expr::function(
            fun.clone(),
            subst_time(base, var, repl),
            slots.iter().map(|s| subst_time(s, var, repl)).collect(),
        ),
        ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } => Expr::flow(
            fun.clone(),
            time.substitute(var, repl),
            subst_time(base, var, repl),
            slots.iter().map(|s| subst_time(s, var, repl)).collect(),
        ),
        ExprKind::NonAutonomous {
            fun,
            t_order,
            time,
            base,
            slots,
        } => Expr::nonautonomous(
            fun.clone(),
            *t_order,
            time.substitute(var, repl),
            subst_time(base, var, repl),
            slots.iter().map(|s| subst_time(s, var, repl)).collect(),
        ),
    }
}

/// Replaces every occurrence of the space variable `x` by `repl`.
pub fn substitute(ex: &Expr, x: &Expr, repl: &Expr) -> Result<Expr> {
    let var = space_variable(x)?;
    Ok(subst(&ex.canonicalize(), var, &repl.canonicalize()))
}

/// Replaces the time variable `t` by `repl` in every time argument of `ex`.
pub fn substitute_time(ex: &Expr, t: &TimeExpr, repl: &TimeExpr) -> Result<Expr> {
    let var = time_variable(t)?;
    Ok(subst_time(&ex.canonicalize(), var, repl))
}

/// Variable substitution over either kind of expression.
///
/// A space variable may only be replaced by a space expression; a time
/// variable by a time expression, inside either a time or a space
/// expression.
pub fn substitute_var(
    ex: &crate::expr::Expression,
    x: &crate::expr::Expression,
    repl: &crate::expr::Expression,
) -> Result<crate::expr::Expression> {
    use crate::expr::Expression as X;
    match (ex, x, repl) {
        (X::Space(e), X::Space(x), X::Space(r)) => substitute(e, x, r).map(X::Space),
        (X::Space(e), X::Time(t), X::Time(r)) => substitute_time(e, t, r).map(X::Space),
        (X::Time(e), X::Time(t), X::Time(r)) => {
            let var = time_variable(t)?;
            Ok(X::Time(e.substitute(var, r)))
        }
        (X::Time(_), X::Space(_), X::Space(_)) => Ok(ex.clone()),
        _ => Err(Error::KindMismatch),
    }
}

/// Result of [`substitute_fun`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunSubstitution {
    pub expr: Expr,
    /// Whether flows of the substituted symbol remain in the result. Those
    /// are never rewritten; apply `fe2def` first if they must go.
    pub untouched_flows: bool,
}

/// Replaces the function symbol `fun` by the expression `repl` in the
/// variable `hole`: `F^(k)(b)(d1..dk)` becomes the k-fold differential of
/// `repl` in directions `d1..dk`, evaluated at `hole = b`.
pub fn substitute_fun(ex: &Expr, fun: &FunctionSymbol, repl: &Expr, hole: &Expr) -> Result<FunSubstitution> {
    let hole = space_variable(hole)?;
    if !fun.is_autonomous() {
        return Err(Error::AutonomyViolation(format!(
            "cannot substitute nonautonomous `{fun}`"
        )));
    }
    let fresh = fresh_name("s");
    let template = subst(&repl.canonicalize(), hole, &Expr::variable(fresh.clone()));
    let mut sub = FunSubstituter {
        fun,
        fresh: &fresh,
        template: &template,
        untouched_flows: false,
        memo: HashMap::new(),
    };
    let expr = sub.run(&ex.canonicalize());
    Ok(FunSubstitution {
        expr,
        untouched_flows: sub.untouched_flows,
    })
}

struct FunSubstituter<'a> {
    fun: &'a FunctionSymbol,
    fresh: &'a str,
    template: &'a Expr,
    untouched_flows: bool,
    memo: HashMap<Expr, Expr>,
}

impl FunSubstituter<'_> {
    fn run(&mut self, ex: &Expr) -> Expr {
        if let Some(r) = self.memo.get(ex) {
            return r.clone();
        }
        let r = match ex.kind() {
            ExprKind::Variable(_) => ex.clone(),
            ExprKind::Combination(terms) => {
                Expr::combination(terms.iter().map(|(e, c)| (self.run(e), c.clone())).collect())
            }
            ExprKind::Function { fun, base, slots } if fun == self.fun => {
                let base = self.run(base);
                let mut g = self.template.clone();
                for s in slots {
                    let s = self.run(s);
                    g = diff(&g, self.fresh, &s);
                }
                subst(&g, self.fresh, &base)
            }
            kind => {
                if let ExprKind::Flow { fun, .. } = kind {
                    if fun == self.fun {
                        self.untouched_flows = true;
                    }
                }
                let (base, slots) = kind.base_and_slots().expect("application");
                let base = self.run(base);
                let slots = slots.iter().map(|s| self.run(s)).collect();
                ex.with_children(base, slots)
            }
        };
        self.memo.insert(ex.clone(), r.clone());
        r
    }
}

fn require_autonomous(funs: &[&FunctionSymbol]) -> Result<()> {
    match funs.iter().find(|f| !f.is_autonomous()) {
        Some(f) => Err(Error::AutonomyViolation(format!(
            "commutator of nonautonomous `{f}`"
        ))),
        None => Ok(()),
    }
}

/// `[X,Y](u) = X'(u).Y(u) - Y'(u).X(u)`.
pub fn commutator(x: &FunctionSymbol, y: &FunctionSymbol, u: &Expr) -> Result<Expr> {
    require_autonomous(&[x, y])?;
    let u = u.canonicalize();
    Ok(bracket(x, y, &u))
}

fn bracket(x: &FunctionSymbol, y: &FunctionSymbol, u: &Expr) -> Expr {
    let xu = Expr::function(x.clone(), u.clone(), Vec::new());
    let yu = Expr::function(y.clone(), u.clone(), Vec::new());
    Expr::function(x.clone(), u.clone(), vec![yu]) - Expr::function(y.clone(), u.clone(), vec![xu])
}

/// Double commutator `[A,[B,C]](u)`, built by substituting the inner bracket
/// for a placeholder symbol in the outer one.
pub fn commutator3(a: &FunctionSymbol, b: &FunctionSymbol, c: &FunctionSymbol, u: &Expr) -> Result<Expr> {
    require_autonomous(&[a, b, c])?;
    let placeholder = FunctionSymbol::autonomous(&fresh_name("Z"));
    let hole = fresh_var("c");
    let inner = bracket(b, c, &hole);
    let outer = bracket(a, &placeholder, &u.canonicalize());
    Ok(substitute_fun(&outer, &placeholder, &inner, &hole)?.expr)
}
