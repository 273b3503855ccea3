//! Text, LaTeX and prefix renderings, and the parser for text and prefix
//! input.
//!
//! `to_text` is single-line ASCII: `A''(u)(v,w)`, `A'(u)*v`, `A^(4)(u)(..)`,
//! `d2E_A(t,u)*v`, `d2^2E_A(t,u)(v,w)`, `d1d2S(t,u)*v`. `to_prefix` is the
//! machine format and round-trips through [`parse`] exactly.

mod parse;

use std::fmt::Write;

use num::{One, Signed};

use crate::expr::{Expr, ExprKind, FunctionSymbol, Rational, TimeExpr};

pub use parse::{parse, parse_space, parse_time};

fn primes(k: usize) -> String {
    match k {
        0..=3 => "'".repeat(k),
        _ => format!("^({k})"),
    }
}

fn power(op: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => op.to_string(),
        _ => format!("{op}^{k}"),
    }
}

/// Writes `c*term` pieces joined by ` + ` / ` - `.
fn join_terms<T>(
    out: &mut String,
    terms: &[(T, Rational)],
    mut term: impl FnMut(&mut String, &T),
    mut coef: impl FnMut(&mut String, &Rational),
) {
    for (i, (t, c)) in terms.iter().enumerate() {
        match (i, c.is_negative()) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        if !a.is_one() {
            coef(out, &a);
        }
        term(out, t);
    }
}

pub fn time_to_text(t: &TimeExpr) -> String {
    if t.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    join_terms(
        &mut out,
        t.terms(),
        |o, v| o.push_str(v),
        |o, c| {
            let _ = write!(o, "{c}*");
        },
    );
    out
}

pub fn to_text(ex: &Expr) -> String {
    let mut out = String::new();
    text(&mut out, ex);
    out
}

fn text(out: &mut String, ex: &Expr) {
    match ex.kind() {
        ExprKind::Variable(n) => out.push_str(n),
        ExprKind::Combination(terms) if terms.is_empty() => out.push('0'),
        ExprKind::Combination(terms) => join_terms(out, terms, text, |o, c| {
            let _ = write!(o, "{c}*");
        }),
        ExprKind::Function { fun, base, slots } => {
            let _ = write!(out, "{fun}{}(", primes(slots.len()));
            text(out, base);
            out.push(')');
            text_slots(out, slots);
        }
        ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } => {
            let _ = write!(out, "{}E_{fun}({},", power("d2", slots.len()), time_to_text(time));
            text(out, base);
            out.push(')');
            text_slots(out, slots);
        }
        ExprKind::NonAutonomous {
            fun,
            t_order,
            time,
            base,
            slots,
        } => {
            let _ = write!(
                out,
                "{}{}{fun}({},",
                power("d1", *t_order as usize),
                power("d2", slots.len()),
                time_to_text(time)
            );
            text(out, base);
            out.push(')');
            text_slots(out, slots);
        }
    }
}

fn text_slots(out: &mut String, slots: &[Expr]) {
    match slots {
        [] => {}
        [s] => {
            out.push('*');
            if matches!(s.kind(), ExprKind::Combination(_)) {
                out.push('(');
                text(out, s);
                out.push(')');
            } else {
                text(out, s);
            }
        }
        _ => {
            out.push('(');
            for (i, s) in slots.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                text(out, s);
            }
            out.push(')');
        }
    }
}

fn latex_coef(out: &mut String, c: &Rational) {
    if c.is_integer() {
        let _ = write!(out, "{c}");
    } else {
        let _ = write!(out, "\\tfrac{{{}}}{{{}}}", c.numer(), c.denom());
    }
}

fn latex_time(out: &mut String, t: &TimeExpr) {
    if t.is_zero() {
        out.push('0');
        return;
    }
    join_terms(out, t.terms(), |o, v| o.push_str(v), latex_coef);
}

pub fn to_latex(ex: &Expr) -> String {
    let mut out = String::new();
    latex(&mut out, ex);
    out
}

fn latex_pow(op: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => op.to_string(),
        _ => format!("{op}^{{{k}}}"),
    }
}

fn latex(out: &mut String, ex: &Expr) {
    match ex.kind() {
        ExprKind::Variable(n) => out.push_str(n),
        ExprKind::Combination(terms) if terms.is_empty() => out.push('0'),
        ExprKind::Combination(terms) => join_terms(out, terms, latex, latex_coef),
        ExprKind::Function { fun, base, slots } => {
            let k = slots.len();
            let marks = if k <= 3 {
                "'".repeat(k)
            } else {
                format!("^{{({k})}}")
            };
            let _ = write!(out, "{}{marks}(", latex_name(fun));
            latex(out, base);
            out.push(')');
            latex_slots(out, slots);
        }
        ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } => {
            out.push_str(&latex_pow("\\partial_{2}", slots.len()));
            let _ = write!(out, "\\mathcal{{E}}_{{{}}}(", latex_name(fun));
            latex_time(out, time);
            out.push(',');
            latex(out, base);
            out.push(')');
            latex_slots(out, slots);
        }
        ExprKind::NonAutonomous {
            fun,
            t_order,
            time,
            base,
            slots,
        } => {
            out.push_str(&latex_pow("\\partial_{1}", *t_order as usize));
            out.push_str(&latex_pow("\\partial_{2}", slots.len()));
            let _ = write!(out, "{}(", latex_name(fun));
            latex_time(out, time);
            out.push(',');
            latex(out, base);
            out.push(')');
            latex_slots(out, slots);
        }
    }
}

fn latex_name(f: &FunctionSymbol) -> String {
    let n = f.name();
    if n.chars().count() > 1 {
        format!("\\mathrm{{{n}}}")
    } else {
        n.to_string()
    }
}

fn latex_slots(out: &mut String, slots: &[Expr]) {
    match slots {
        [] => {}
        [s] => {
            out.push_str("\\cdot ");
            if matches!(s.kind(), ExprKind::Combination(_)) {
                out.push_str("\\left(");
                latex(out, s);
                out.push_str("\\right)");
            } else {
                latex(out, s);
            }
        }
        _ => {
            out.push('(');
            for (i, s) in slots.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                latex(out, s);
            }
            out.push(')');
        }
    }
}

pub fn time_to_prefix(t: &TimeExpr) -> String {
    let mut out = String::from("(time");
    for (v, c) in t.terms() {
        let _ = write!(out, " ({c} {v})");
    }
    out.push(')');
    out
}

pub fn to_prefix(ex: &Expr) -> String {
    let mut out = String::new();
    prefix(&mut out, ex);
    out
}

fn prefix(out: &mut String, ex: &Expr) {
    match ex.kind() {
        ExprKind::Variable(n) => {
            let _ = write!(out, "(var {n})");
        }
        ExprKind::Combination(terms) => {
            out.push_str("(lin");
            for (e, c) in terms {
                let _ = write!(out, " ({c} ");
                prefix(out, e);
                out.push(')');
            }
            out.push(')');
        }
        ExprKind::Function { fun, base, slots } => {
            let _ = write!(out, "(app {fun} ");
            prefix_children(out, base, slots);
        }
        ExprKind::Flow {
            fun,
            time,
            base,
            slots,
        } => {
            let _ = write!(out, "(flow {fun} {} ", time_to_prefix(time));
            prefix_children(out, base, slots);
        }
        ExprKind::NonAutonomous {
            fun,
            t_order,
            time,
            base,
            slots,
        } => {
            let _ = write!(out, "(nonaut {fun} {t_order} {} ", time_to_prefix(time));
            prefix_children(out, base, slots);
        }
    }
}

fn prefix_children(out: &mut String, base: &Expr, slots: &[Expr]) {
    prefix(out, base);
    for s in slots {
        out.push(' ');
        prefix(out, s);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{apply, flow, nonautonomous_apply, rational, Context};

    #[test]
    fn text_forms() {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t", "s"]).unwrap();
        let x = ctx.space_vars(&["u", "v", "w"]).unwrap();
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let s = ctx.nonautonomous_functions(&["S"]).unwrap().remove(0);
        let (u, v, w) = (&x[0], &x[1], &x[2]);
        let c = |e: crate::Result<Expr>| e.unwrap().canonicalize();
        assert_eq!(to_text(&Expr::zero()), "0");
        assert_eq!(to_latex(&Expr::zero()), "0");
        let e = c(apply(&a, u, &[v.clone(), v.clone(), v.clone(), v.clone()]));
        assert_eq!(to_text(&e), "A^(4)(u)(v,v,v,v)");
        let e = c(flow(&a, &t[0], u, &[v.clone(), w.clone()]));
        assert_eq!(to_text(&e), "d2^2E_A(t,u)(v,w)");
        assert_eq!(to_latex(&e), "\\partial_{2}^{2}\\mathcal{E}_{A}(t,u)(v,w)");
        let e = c(flow(&a, &t[0], u, &[v.clone()]));
        assert_eq!(to_latex(&e), "\\partial_{2}\\mathcal{E}_{A}(t,u)\\cdot v");
        let e = c(nonautonomous_apply(&s, 2, &t[0], u, &[v.clone()]));
        assert_eq!(to_text(&e), "d1^2d2S(t,u)*v");
        let e = c(apply(&a, u, &[v + w]));
        assert_eq!(to_text(&e), "A'(u)*(v + w)");
        let half = Rational::new(1.into(), 2.into());
        let e = u.clone() * half - v.clone() * 2;
        assert_eq!(to_text(&e), "1/2*u - 2*v");
        assert_eq!(to_latex(&e), "\\tfrac{1}{2}u - 2v");
        let tt = t[0].clone() * rational(-1) + t[1].clone() * 3;
        assert_eq!(time_to_text(&tt), "3*s - t");
    }

    #[test]
    fn prefix_forms() {
        let mut ctx = Context::new();
        let t = ctx.time_vars(&["t"]).unwrap().remove(0);
        let x = ctx.space_vars(&["u", "v"]).unwrap();
        let a = ctx.functions(&["A"]).unwrap().remove(0);
        let e = flow(&a, &t, &x[0], &[x[1].clone()]).unwrap().canonicalize();
        assert_eq!(to_prefix(&e), "(flow A (time (1 t)) (var u) (var v))");
        assert_eq!(to_prefix(&Expr::zero()), "(lin)");
        let e = &x[0] - &x[1];
        assert_eq!(to_prefix(&e), "(lin (1 (var u)) (-1 (var v)))");
    }
}
