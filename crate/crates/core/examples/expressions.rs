// Declaring symbols and building expressions; canonical forms.

use flowsym::{apply, flow, linear_combine, rational, Context, Expression};

pub fn main() -> flowsym::Result<()> {
    let mut ctx = Context::new();
    let ts = ctx.time_vars(&["t", "s", "r"])?;
    let xs = ctx.space_vars(&["u", "v", "w"])?;
    let a = ctx.functions(&["A"])?.remove(0);
    let (t, s, r) = (&ts[0], &ts[1], &ts[2]);
    let (u, v, w) = (&xs[0], &xs[1], &xs[2]);

    let tau = linear_combine(&[
        (Expression::Time(r.clone()), rational(3)),
        (Expression::Time(t.clone()), rational(1)),
        (Expression::Time(s.clone()), rational(-2)),
    ])?;
    println!("time combination: {}", tau.as_time().unwrap());

    println!("{}", apply(&a, u, &[])?);
    println!("{}", flow(&a, t, u, &[])?);
    println!("{}", apply(&a, u, &[v.clone(), w.clone()])?);
    println!("{}", flow(&a, t, u, &[v.clone()])?);

    // slots are symmetric and combinations merge
    let ex = -2 * flow(&a, t, u, &[v.clone(), w.clone()])?
        + 2 * u.clone()
        + apply(&a, v, &[w.clone()])?
        + 2 * flow(&a, t, u, &[w.clone(), v.clone()])?;
    println!("canonical: {}", ex.canonicalize());

    // a zero slot annihilates a derivative
    let zero = apply(&a, u, &[v.clone() - v.clone()])?;
    println!("A'(u)*(v - v) = {}", zero.canonicalize());
    Ok(())
}
