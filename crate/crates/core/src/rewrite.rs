//! Rewriting with the fundamental identity `F(E_F(t,u)) = d2E_F(t,u).F(u)`
//! and its repeated differentials.
//!
//! All rewrites run innermost-first to a fixpoint under a step budget.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num::{One, Zero};

use crate::calculus::{diff, expand, subst, subst_time};
use crate::error::{Error, Result};
use crate::expr::{Expr, ExprKind, FunctionSymbol, Rational, TimeExpr};

const FUN: &str = "%F";
const TIME: &str = "%T";
const BASE: &str = "%x";

fn direction(i: usize) -> String {
    format!("%d{i}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteConfig {
    /// Highest order of reduction identity generated on demand.
    pub max_identity_order: usize,
    /// Maximum number of rule applications per call.
    pub step_budget: usize,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        Self {
            max_identity_order: 8,
            step_budget: 1_000_000,
        }
    }
}

/// The order-`k` differentiated fundamental identity, solved for its
/// highest flow derivative `d2^k E_F(t,x)(F(x), d2..dk)`.
///
/// Stored over placeholder symbols; use [`ReductionIdentity::instantiate`]
/// to obtain a concrete instance.
#[derive(Debug, Clone)]
pub struct ReductionIdentity {
    pub order: usize,
    pub pattern: Expr,
    pub rhs: Expr,
}

impl ReductionIdentity {
    fn generate(order: usize) -> ReductionIdentity {
        assert!(order >= 1);
        let f = FunctionSymbol::autonomous(FUN);
        let tau = TimeExpr::variable(Arc::from(TIME));
        let x = Expr::variable(Arc::from(BASE));
        let fx = Expr::function(f.clone(), x.clone(), Vec::new());
        let e = Expr::flow(f.clone(), tau.clone(), x.clone(), Vec::new());
        let mut identity = Expr::function(f.clone(), e, Vec::new())
            - Expr::flow(f.clone(), tau.clone(), x.clone(), vec![fx.clone()]);
        let mut slots = vec![fx];
        for i in 2..=order {
            let d = Expr::variable(Arc::from(direction(i)));
            identity = diff(&identity, BASE, &d);
            slots.push(d);
        }
        let identity = expand(&identity);
        let pattern = Expr::flow(f, tau, x, slots);
        let hits: Vec<Rational> = identity
            .terms()
            .into_iter()
            .filter(|(e, _)| *e == pattern)
            .map(|(_, c)| c)
            .collect();
        assert!(
            hits.len() == 1 && (hits[0].is_one() || (-&hits[0]).is_one()),
            "order-{order} identity must contain its leading term once with unit coefficient"
        );
        let c = hits[0].clone();
        let rest = identity - pattern.scale(&c);
        let rhs = rest.scale(&(-Rational::one() / c));
        ReductionIdentity { order, pattern, rhs }
    }

    /// Both sides for flow symbol `fun`, time `time`, base `base` and the
    /// remaining `order - 1` slots `others`.
    pub fn instantiate(
        &self,
        fun: &FunctionSymbol,
        time: &TimeExpr,
        base: &Expr,
        others: &[Expr],
    ) -> (Expr, Expr) {
        assert_eq!(others.len() + 1, self.order, "wrong number of slots");
        let inst = |ex: &Expr| {
            let mut r = rename_fun(ex, FUN, fun);
            r = subst_time(&r, TIME, time);
            r = subst(&r, BASE, base);
            for (i, d) in others.iter().enumerate() {
                r = subst(&r, &direction(i + 2), d);
            }
            r
        };
        (inst(&self.pattern), inst(&self.rhs))
    }
}

fn rename_fun(ex: &Expr, from: &str, to: &FunctionSymbol) -> Expr {
    let pick = |f: &FunctionSymbol| {
        if f.name() == from {
            to.clone()
        } else {
            f.clone()
        }
    };
    match ex.kind() {
        ExprKind::Variable(_) => ex.clone(),
        ExprKind::Combination(terms) => Expr::combination(
            terms
                .iter()
                .map(|(e, c)| (rename_fun(e, from, to), c.clone()))
                .collect(),
        ),
        ExprKind::Function { fun, base, slots } => Expr::function(
            pick(fun),
            rename_fun(base, from, to),
            slots.iter().map(|s| rename_fun(s, from, to)).collect(),
        ),
        ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } => Expr::flow(
            pick(fun),
            time.clone(),
            rename_fun(base, from, to),
            slots.iter().map(|s| rename_fun(s, from, to)).collect(),
        ),
        ExprKind::NonAutonomous { .. } => ex.clone(),
    }
}

type IdentityTable = RwLock<BTreeMap<usize, Arc<ReductionIdentity>>>;

fn table() -> &'static IdentityTable {
    static TABLE: OnceLock<IdentityTable> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

/// The memoized reduction identity of the given order (`order >= 1`).
pub fn reduction_identity(order: usize) -> Arc<ReductionIdentity> {
    if let Some(id) = table().read().expect("identity table poisoned").get(&order) {
        return id.clone();
    }
    let id = Arc::new(ReductionIdentity::generate(order));
    table()
        .write()
        .expect("identity table poisoned")
        .entry(order)
        .or_insert(id)
        .clone()
}

#[derive(Clone, Copy)]
enum Rule {
    Fe2Def,
    Def2Fe,
    ReduceOrder,
}

/// Applies the fundamental-identity rules under a configuration.
#[derive(Debug, Default)]
pub struct Rewriter {
    cfg: RewriteConfig,
    steps: usize,
}

impl Rewriter {
    pub fn new(cfg: RewriteConfig) -> Self {
        Self { cfg, steps: 0 }
    }

    /// Rule applications performed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `F(E_F(t,b)) -> d2E_F(t,b).F(b)`, and its differential
    /// `F'(E_F(t,b)).(d2E_F(t,b).x) -> d2^2E_F(t,b)(F(b),x) + d2E_F(t,b).F'(b).x`.
    pub fn fe2def(&mut self, ex: &Expr) -> Result<Expr> {
        self.fixpoint(ex, Rule::Fe2Def)
    }

    /// `d2E_F(t,b).F(b) -> F(E_F(t,b))`.
    pub fn def2fe(&mut self, ex: &Expr) -> Result<Expr> {
        self.fixpoint(ex, Rule::Def2Fe)
    }

    /// Rewrites every `d2^k E_F(t,b)(F(b), ..)` by the order-`k` reduction
    /// identity.
    pub fn reduce_order(&mut self, ex: &Expr) -> Result<Expr> {
        self.fixpoint(ex, Rule::ReduceOrder)
    }

    fn fixpoint(&mut self, ex: &Expr, rule: Rule) -> Result<Expr> {
        let mut cur = ex.canonicalize();
        loop {
            let mut memo = HashMap::new();
            let next = self.pass(&cur, rule, &mut memo)?;
            if next == cur {
                return Ok(next);
            }
            cur = next;
        }
    }

    fn pass(&mut self, ex: &Expr, rule: Rule, memo: &mut HashMap<Expr, Expr>) -> Result<Expr> {
        if let Some(r) = memo.get(ex) {
            return Ok(r.clone());
        }
        let rebuilt = match ex.kind() {
            ExprKind::Variable(_) => ex.clone(),
            ExprKind::Combination(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                for (e, c) in terms {
                    out.push((self.pass(e, rule, memo)?, c.clone()));
                }
                Expr::combination(out)
            }
            kind => {
                let (base, slots) = kind.base_and_slots().expect("application");
                let base = self.pass(base, rule, memo)?;
                let mut new_slots = Vec::with_capacity(slots.len());
                for s in slots {
                    new_slots.push(self.pass(s, rule, memo)?);
                }
                ex.with_children(base, new_slots)
            }
        };
        let result = match self.apply_rule(&rebuilt, rule)? {
            Some(r) => {
                self.steps += 1;
                if self.steps > self.cfg.step_budget {
                    return Err(Error::StepBudgetExceeded(self.cfg.step_budget));
                }
                self.pass(&r, rule, memo)?
            }
            None => rebuilt,
        };
        memo.insert(ex.clone(), result.clone());
        Ok(result)
    }

    fn apply_rule(&self, ex: &Expr, rule: Rule) -> Result<Option<Expr>> {
        match rule {
            Rule::Fe2Def => Ok(fe2def_at(ex)),
            Rule::Def2Fe => Ok(def2fe_at(ex)),
            Rule::ReduceOrder => self.reduce_at(ex),
        }
    }

    fn reduce_at(&self, ex: &Expr) -> Result<Option<Expr>> {
        let ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } = ex.kind()
        else {
            return Ok(None);
        };
        let target = Expr::function(fun.clone(), base.clone(), Vec::new());
        let hits: Vec<usize> = (0..slots.len()).filter(|&i| slots[i] == target).collect();
        let Some(&i) = hits.first() else {
            return Ok(None);
        };
        if hits.len() > 1 {
            log::debug!("reduce_order: {} occurrences of {target} in {ex}", hits.len());
        }
        let order = slots.len();
        if order > self.cfg.max_identity_order {
            return Err(Error::UnsupportedOrder {
                order,
                max: self.cfg.max_identity_order,
            });
        }
        let others: Vec<Expr> = slots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| s.clone())
            .collect();
        let (_, rhs) = reduction_identity(order).instantiate(fun, time, base, &others);
        Ok(Some(rhs))
    }
}

fn fe2def_at(ex: &Expr) -> Option<Expr> {
    let ExprKind::Function { fun, base, slots } = ex.kind() else {
        return None;
    };
    let ExprKind::Flow {
        fun: flow_fun,
        time,
        base: b,
        slots: flow_slots,
    } = base.kind()
    else {
        return None;
    };
    if flow_fun != fun || !flow_slots.is_empty() {
        return None;
    }
    let fb = Expr::function(fun.clone(), b.clone(), Vec::new());
    match slots.as_slice() {
        [] => Some(Expr::flow(fun.clone(), time.clone(), b.clone(), vec![fb])),
        // F'(E_F(t,b)).(d2E_F(t,b).x), the differential of the zero-slot rule
        [s] => {
            let ExprKind::Flow {
                fun: f2,
                time: t2,
                base: b2,
                slots: s2,
            } = s.kind()
            else {
                return None;
            };
            if f2 != fun || t2 != time || b2 != b || s2.len() != 1 {
                return None;
            }
            let x = s2[0].clone();
            let dfx = Expr::function(fun.clone(), b.clone(), vec![x.clone()]);
            Some(
                Expr::flow(fun.clone(), time.clone(), b.clone(), vec![fb, x])
                    + Expr::flow(fun.clone(), time.clone(), b.clone(), vec![dfx]),
            )
        }
        _ => None,
    }
}

fn def2fe_at(ex: &Expr) -> Option<Expr> {
    let ExprKind::Flow {
        fun,
        time,
        base,
        slots,
    } = ex.kind()
    else {
        return None;
    };
    match slots.as_slice() {
        [s] if *s == Expr::function(fun.clone(), base.clone(), Vec::new()) => {
            let e = Expr::flow(fun.clone(), time.clone(), base.clone(), Vec::new());
            Some(Expr::function(fun.clone(), e, Vec::new()))
        }
        _ => None,
    }
}

/// [`Rewriter::fe2def`] with the default configuration.
pub fn fe2def(ex: &Expr) -> Result<Expr> {
    Rewriter::default().fe2def(ex)
}

/// [`Rewriter::def2fe`] with the default configuration.
pub fn def2fe(ex: &Expr) -> Result<Expr> {
    Rewriter::default().def2fe(ex)
}

/// [`Rewriter::reduce_order`] with the default configuration.
pub fn reduce_order(ex: &Expr) -> Result<Expr> {
    Rewriter::default().reduce_order(ex)
}

/// Coefficient of `term` among the top-level terms of `ex`.
pub fn coefficient_of(ex: &Expr, term: &Expr) -> Rational {
    ex.terms()
        .into_iter()
        .find(|(e, _)| e == term)
        .map(|(_, c)| c)
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{apply, flow, Context};

    struct Fx {
        t: TimeExpr,
        u: Expr,
        v: Expr,
        w: Expr,
        a: FunctionSymbol,
        b: FunctionSymbol,
    }

    fn fx() -> Fx {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t"]).unwrap().remove(0);
        let x = ctx.space_vars(&["u", "v", "w"]).unwrap();
        let f = ctx.functions(&["A", "B"]).unwrap();
        Fx {
            t,
            u: x[0].clone(),
            v: x[1].clone(),
            w: x[2].clone(),
            a: f[0].clone(),
            b: f[1].clone(),
        }
    }

    fn ap(f: &FunctionSymbol, base: &Expr, slots: &[Expr]) -> Expr {
        apply(f, base, slots).unwrap().canonicalize()
    }

    fn fl(f: &FunctionSymbol, t: &TimeExpr, base: &Expr, slots: &[Expr]) -> Expr {
        flow(f, t, base, slots).unwrap().canonicalize()
    }

    #[test]
    fn fe2def_and_back() {
        let x = fx();
        let e = fl(&x.a, &x.t, &x.u, &[]);
        let ex1 = ap(&x.a, &e, &[]);
        let ex2 = fe2def(&ex1).unwrap();
        assert_eq!(ex2, fl(&x.a, &x.t, &x.u, &[ap(&x.a, &x.u, &[])]));
        assert_eq!(def2fe(&ex2).unwrap(), ex1);
    }

    #[test]
    fn rules_require_matching_symbols() {
        let x = fx();
        let e = fl(&x.a, &x.t, &x.u, &[]);
        let ex = ap(&x.b, &e, &[]);
        assert_eq!(fe2def(&ex).unwrap(), ex);
        let ex = fl(&x.a, &x.t, &x.u, &[ap(&x.b, &x.u, &[])]);
        assert_eq!(def2fe(&ex).unwrap(), ex);
    }

    #[test]
    fn fe2def_nested_flows() {
        let x = fx();
        let inner = fl(&x.a, &x.t, &x.u, &[]);
        let outer = fl(&x.a, &x.t, &inner, &[]);
        let ex = ap(&x.a, &outer, &[]);
        let got = fe2def(&ex).unwrap();
        let expected = fl(
            &x.a,
            &x.t,
            &inner,
            &[fl(&x.a, &x.t, &x.u, &[ap(&x.a, &x.u, &[])])],
        );
        assert_eq!(got, expected);
        assert_eq!(def2fe(&got).unwrap(), ex);
    }

    #[test]
    fn fe2def_first_derivative_form() {
        let x = fx();
        let (a, t, u, v) = (&x.a, &x.t, &x.u, &x.v);
        let e = fl(a, t, u, &[]);
        let ex = ap(a, &e, &[fl(a, t, u, &[v.clone()])]);
        let expected = fl(a, t, u, &[ap(a, u, &[]), v.clone()]) + fl(a, t, u, &[ap(a, u, &[v.clone()])]);
        assert_eq!(fe2def(&ex).unwrap(), expected);
        // the order-2 reduction maps it back
        assert_eq!(reduce_order(&expected).unwrap(), ex);
        let other = ap(a, &e, &[fl(a, t, &x.w, &[v.clone()])]);
        assert_eq!(fe2def(&other).unwrap(), other);
    }

    #[test]
    fn reduce_order_first() {
        let x = fx();
        let ex = fl(&x.a, &x.t, &x.u, &[ap(&x.a, &x.u, &[])]);
        assert_eq!(
            reduce_order(&ex).unwrap(),
            ap(&x.a, &fl(&x.a, &x.t, &x.u, &[]), &[])
        );
        let au = ap(&x.a, &x.u, &[]);
        assert_eq!(reduce_order(&au).unwrap(), au);
    }

    #[test]
    fn reduce_order_second() {
        let x = fx();
        let (a, t, u, v) = (&x.a, &x.t, &x.u, &x.v);
        let ex = fl(a, t, u, &[ap(a, u, &[]), v.clone()]);
        let e = fl(a, t, u, &[]);
        let expected = ap(a, &e, &[fl(a, t, u, &[v.clone()])]) - fl(a, t, u, &[ap(a, u, &[v.clone()])]);
        assert_eq!(reduce_order(&ex).unwrap(), expected);
    }

    #[test]
    fn reduce_order_third() {
        let x = fx();
        let (a, t, u, v, w) = (&x.a, &x.t, &x.u, &x.v, &x.w);
        let ex = fl(a, t, u, &[ap(a, u, &[]), v.clone(), w.clone()]);
        let e = fl(a, t, u, &[]);
        let ev = fl(a, t, u, &[v.clone()]);
        let ew = fl(a, t, u, &[w.clone()]);
        let expected = -fl(a, t, u, &[ap(a, u, &[w.clone()]), v.clone()])
            - fl(a, t, u, &[ap(a, u, &[v.clone()]), w.clone()])
            - fl(a, t, u, &[ap(a, u, &[v.clone(), w.clone()])])
            + ap(a, &e, &[fl(a, t, u, &[v.clone(), w.clone()])])
            + ap(a, &e, &[ev, ew]);
        assert_eq!(reduce_order(&ex).unwrap(), expected);
    }

    #[test]
    fn reduce_order_is_idempotent_and_handles_double_slot() {
        let x = fx();
        let au = ap(&x.a, &x.u, &[]);
        let ex = fl(&x.a, &x.t, &x.u, &[au.clone(), au.clone()]);
        let once = reduce_order(&ex).unwrap();
        assert_eq!(reduce_order(&once).unwrap(), once);
        let e = fl(&x.a, &x.t, &x.u, &[]);
        let expected = ap(&x.a, &e, &[ap(&x.a, &e, &[])]) - fl(&x.a, &x.t, &x.u, &[ap(&x.a, &x.u, &[au])]);
        assert_eq!(once, expected);
    }

    #[test]
    fn identity_orders_are_memoized() {
        let a = reduction_identity(3);
        let b = reduction_identity(3);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.order, 3);
    }

    #[test]
    fn unsupported_order_and_budget() {
        let x = fx();
        let au = ap(&x.a, &x.u, &[]);
        let ex = fl(&x.a, &x.t, &x.u, &[au.clone(), x.v.clone(), x.w.clone()]);
        let mut rw = Rewriter::new(RewriteConfig {
            max_identity_order: 2,
            ..Default::default()
        });
        assert_eq!(
            rw.reduce_order(&ex),
            Err(Error::UnsupportedOrder { order: 3, max: 2 })
        );
        let mut rw = Rewriter::new(RewriteConfig {
            step_budget: 0,
            ..Default::default()
        });
        assert_eq!(rw.reduce_order(&ex), Err(Error::StepBudgetExceeded(0)));
    }
}
