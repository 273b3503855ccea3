// Frechet differentials, time derivatives, expansion, substitution and
// commutators.

use flowsym::calculus::{commutator, commutator3, differential, expand, substitute_fun, t_derivative};
use flowsym::render::{parse, to_text};
use flowsym::{Context, Expr, Expression};

fn space(ctx: &Context, text: &str) -> flowsym::Result<Expr> {
    match parse(text, ctx)? {
        Expression::Space(e) => Ok(e),
        Expression::Time(_) => Err(flowsym::Error::KindMismatch),
    }
}

pub fn main() -> flowsym::Result<()> {
    let mut ctx = Context::new();
    let ts = ctx.time_vars(&["t", "s"])?;
    let u = ctx.space_vars(&["u", "v", "w"])?.remove(0);
    let f = ctx.functions(&["A", "B", "C"])?;
    let (a, b, c) = (&f[0], &f[1], &f[2]);

    let ex = space(&ctx, "A(B(u)) + d2E_A(t,u)*v")?;
    let d = differential(&ex, &u, &space(&ctx, "B(w)")?)?;
    println!("differential: {}", to_text(&d));

    let ex = space(&ctx, "E_A(t - 2*s, u + E_B(s,v))")?;
    println!("d/ds: {}", to_text(&t_derivative(&ex, &ts[1])?));

    let ex = space(&ctx, "A''(u)(v + w, v + w)")?;
    println!("expand: {}", to_text(&expand(&ex)));

    let c_ab = commutator(a, b, &u)?;
    println!("[A,B](u) = {}", to_text(&c_ab));
    let nested = substitute_fun(&c_ab, b, &c_ab, &u)?;
    println!("[A,[A,B]](u) = {}", to_text(&expand(&nested.expr)));
    println!("[A,[B,C]](u) = {}", to_text(&commutator3(a, b, c, &u)?));
    Ok(())
}
