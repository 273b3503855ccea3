//! Expression data model.
//!
//! Time arguments are [`TimeExpr`]s, everything else is an [`Expr`]: a space
//! variable, an exact-rational linear combination, or an application of a
//! function symbol, a flow, or a nonautonomous function, each carrying an
//! ordered list of Frechet-derivative slots.
//!
//! Equality and zero detection are defined on the canonical form produced by
//! [`Expr::canonicalize`]. All calculus and rewrite operations return
//! canonical values.

mod context;
mod space;
mod time;

use std::fmt;
use std::sync::Arc;

pub use context::{Context, DeclKind, Declared};
pub use space::{Expr, ExprKind};
pub use time::TimeExpr;

use crate::error::{Error, Result};

/// Exact coefficient type.
pub type Rational = num::BigRational;

/// Shorthand for an integer coefficient.
pub fn rational(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Autonomy {
    Autonomous,
    NonAutonomous,
}

/// A named operator such as `A` or a nonautonomous `S`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionSymbol {
    name: Arc<str>,
    autonomy: Autonomy,
}

impl FunctionSymbol {
    pub(crate) fn new(name: Arc<str>, autonomy: Autonomy) -> Self {
        Self { name, autonomy }
    }

    pub(crate) fn autonomous(name: &str) -> Self {
        Self::new(Arc::from(name), Autonomy::Autonomous)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn autonomy(&self) -> Autonomy {
        self.autonomy
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomy == Autonomy::Autonomous
    }
}

impl fmt::Display for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `F^(k)(base)(slots..)` with `k = slots.len()`.
pub fn apply(fun: &FunctionSymbol, base: &Expr, slots: &[Expr]) -> Result<Expr> {
    if !fun.is_autonomous() {
        return Err(Error::AutonomyViolation(format!(
            "`{fun}` is nonautonomous and needs a time argument"
        )));
    }
    Ok(Expr::raw_function(fun.clone(), base.clone(), slots.to_vec()))
}

/// `d2^k E_F(time, base)(slots..)` with `k = slots.len()`.
pub fn flow(fun: &FunctionSymbol, time: &TimeExpr, base: &Expr, slots: &[Expr]) -> Result<Expr> {
    if !fun.is_autonomous() {
        return Err(Error::UnsupportedConstruct(format!(
            "flow of nonautonomous function `{fun}`"
        )));
    }
    Ok(Expr::raw_flow(
        fun.clone(),
        time.clone(),
        base.clone(),
        slots.to_vec(),
    ))
}

/// `d1^t_order d2^k S(time, base)(slots..)`.
pub fn nonautonomous_apply(
    fun: &FunctionSymbol,
    t_order: u32,
    time: &TimeExpr,
    base: &Expr,
    slots: &[Expr],
) -> Result<Expr> {
    if fun.is_autonomous() {
        return Err(Error::AutonomyViolation(format!(
            "`{fun}` is autonomous and takes no time argument"
        )));
    }
    Ok(Expr::raw_nonautonomous(
        fun.clone(),
        t_order,
        time.clone(),
        base.clone(),
        slots.to_vec(),
    ))
}

/// Either kind of expression, for operations overloaded over both.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Time(TimeExpr),
    Space(Expr),
}

impl Expression {
    pub fn canonicalize(&self) -> Expression {
        match self {
            Expression::Time(t) => Expression::Time(t.clone()),
            Expression::Space(e) => Expression::Space(e.canonicalize()),
        }
    }

    pub fn term_count(&self) -> usize {
        match self {
            Expression::Time(t) => t.terms().len(),
            Expression::Space(e) => e.term_count(),
        }
    }

    pub fn as_space(&self) -> Option<&Expr> {
        match self {
            Expression::Space(e) => Some(e),
            Expression::Time(_) => None,
        }
    }

    pub fn as_time(&self) -> Option<&TimeExpr> {
        match self {
            Expression::Time(t) => Some(t),
            Expression::Space(_) => None,
        }
    }
}

impl From<Expr> for Expression {
    fn from(e: Expr) -> Self {
        Expression::Space(e)
    }
}

impl From<TimeExpr> for Expression {
    fn from(t: TimeExpr) -> Self {
        Expression::Time(t)
    }
}

/// Canonical linear combination of terms that are all time or all space
/// expressions. An empty list yields the space zero.
pub fn linear_combine(terms: &[(Expression, Rational)]) -> Result<Expression> {
    let all_time = terms.iter().all(|(e, _)| matches!(e, Expression::Time(_)));
    let all_space = terms.iter().all(|(e, _)| matches!(e, Expression::Space(_)));
    if all_space {
        Ok(Expression::Space(Expr::combination(
            terms
                .iter()
                .filter_map(|(e, c)| e.as_space().map(|e| (e.canonicalize(), c.clone())))
                .collect(),
        )))
    } else if all_time {
        Ok(Expression::Time(TimeExpr::combine(terms.iter().filter_map(
            |(e, c)| e.as_time().map(|t| (t.clone(), c.clone())),
        ))))
    } else {
        Err(Error::KindMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn ctx() -> (Context, Vec<TimeExpr>, Vec<Expr>, Vec<FunctionSymbol>) {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t", "s", "r"]).unwrap();
        let x = ctx.space_vars(&["u", "v", "w"]).unwrap();
        let f = ctx.functions(&["A", "B"]).unwrap();
        (ctx, t, x, f)
    }

    #[test]
    fn declare_returns_atoms_in_order() {
        let mut ctx = Context::new();
        let d = ctx.declare(DeclKind::TimeVariable, &["t", "s", "r"]).unwrap();
        let names: Vec<_> = d
            .iter()
            .map(|d| match d {
                Declared::Time(t) => t.as_variable().unwrap().to_string(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(names, ["t", "s", "r"]);
    }

    #[test]
    fn duplicate_declaration_is_rejected() {
        let mut ctx = Context::new();
        ctx.space_vars(&["u"]).unwrap();
        assert_eq!(
            ctx.space_vars(&["u"]),
            Err(Error::DeclarationConflict("u".into()))
        );
        assert_eq!(ctx.functions(&["u"]), Err(Error::DeclarationConflict("u".into())));
        assert_eq!(
            ctx.space_vars(&["a", "a"]),
            Err(Error::DeclarationConflict("a".into()))
        );
        assert!(!ctx.is_declared("a"));
        assert!(matches!(
            ctx.space_vars(&["E_A"]),
            Err(Error::InvalidIdentifier(_))
        ));
    }

    #[test]
    fn nonautonomous_declaration() {
        let mut ctx = Context::new();
        let s = ctx.nonautonomous_functions(&["S"]).unwrap();
        assert_eq!(s[0].autonomy(), Autonomy::NonAutonomous);
    }

    #[test]
    fn time_combination_is_flat_map() {
        let (_, t, _, _) = ctx();
        let (t_, s, r) = (t[0].clone(), t[1].clone(), t[2].clone());
        let ex = t_.clone() - 2 * s.clone() + 3 * r.clone();
        assert_eq!(ex.coefficient("t"), rational(1));
        assert_eq!(ex.coefficient("s"), rational(-2));
        assert_eq!(ex.coefficient("r"), rational(3));
        assert_eq!(ex.terms().len(), 3);
        assert!((t_.clone() - t_).is_zero());
    }

    #[test]
    fn cancellation_and_halves() {
        let (_, _, x, _) = ctx();
        let (u, v) = (&x[0], &x[1]);
        assert!((u - u).is_zero());
        let half = Rational::new(1.into(), 2.into());
        let a = (u + v) * half.clone();
        let b = (u - v) * half;
        assert_eq!(a + b, u.clone());
    }

    #[test]
    fn thirds_cancel_exactly() {
        let (_, _, x, _) = ctx();
        let third = Rational::new(1.into(), 3.into());
        let u = &x[0];
        let ex = u.clone() * third.clone() + u.clone() * third.clone() + u.clone() * third - u.clone();
        assert!(ex.is_zero());
    }

    #[test]
    fn mixing_kinds_is_an_error() {
        let (_, t, x, _) = ctx();
        let terms = [
            (Expression::Time(t[0].clone()), rational(1)),
            (Expression::Space(x[0].clone()), rational(1)),
        ];
        assert_eq!(linear_combine(&terms), Err(Error::KindMismatch));
    }

    #[test]
    fn application_constructors() {
        let (mut ctx, t, x, f) = ctx();
        let (u, v, w) = (&x[0], &x[1], &x[2]);
        let a = &f[0];
        let e = apply(a, u, &[v.clone(), w.clone()]).unwrap();
        assert_eq!(e.to_string(), "A''(u)(v,w)");
        let e = flow(a, &t[0], u, &[v.clone()]).unwrap();
        assert_eq!(e.to_string(), "d2E_A(t,u)*v");
        let s = ctx.nonautonomous_functions(&["S"]).unwrap().remove(0);
        let e = nonautonomous_apply(&s, 1, &t[0], u, &[]).unwrap();
        assert_eq!(e.to_string(), "d1S(t,u)");
        assert!(matches!(
            flow(&s, &t[0], u, &[]),
            Err(Error::UnsupportedConstruct(_))
        ));
        assert!(matches!(
            nonautonomous_apply(a, 1, &t[0], u, &[]),
            Err(Error::AutonomyViolation(_))
        ));
        assert!(matches!(apply(&s, u, &[]), Err(Error::AutonomyViolation(_))));
    }

    #[test]
    fn slots_sorted_on_canonicalize() {
        let (_, _, x, f) = ctx();
        let (u, v, w) = (&x[0], &x[1], &x[2]);
        let e = apply(&f[0], u, &[w.clone(), v.clone()]).unwrap();
        let c = e.canonicalize();
        assert_eq!(
            c,
            apply(&f[0], u, &[v.clone(), w.clone()]).unwrap().canonicalize()
        );
        assert_eq!(c.to_string(), "A''(u)(v,w)");
    }

    #[test]
    fn zero_slot_annihilates() {
        let (_, _, x, f) = ctx();
        let e = apply(&f[0], &x[0], &[Expr::zero()]).unwrap();
        assert!(e.canonicalize().is_zero());
    }

    #[test]
    fn term_counts() {
        let (_, _, x, f) = ctx();
        assert_eq!(Expr::zero().term_count(), 0);
        assert_eq!(x[0].term_count(), 1);
        let e = apply(&f[0], &x[0], &[]).unwrap() + x[1].clone() * 2;
        assert_eq!(e.term_count(), 2);
        assert!(rational(0).is_zero());
    }

    #[test]
    fn context_check_finds_undeclared() {
        let (ctx, _, _, _) = ctx();
        let mut other = Context::new();
        let z = other.space_vars(&["z"]).unwrap().remove(0);
        assert_eq!(ctx.check(&z), Err(Error::UndeclaredSymbol("z".into())));
    }
}
