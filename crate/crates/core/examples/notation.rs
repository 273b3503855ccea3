// Text, LaTeX and prefix renderings, and parsing them back.

use flowsym::render::{parse, to_latex, to_prefix, to_text};
use flowsym::rewrite::reduce_order;
use flowsym::{apply, flow, Context, Expression};

pub fn main() -> flowsym::Result<()> {
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t"])?.remove(0);
    let x = ctx.space_vars(&["u", "v", "w"])?;
    let a = ctx.functions(&["A"])?.remove(0);
    let ex = flow(
        &a,
        &t,
        &x[0],
        &[apply(&a, &x[0], &[])?, x[1].clone(), x[2].clone()],
    )?;
    let reduced = reduce_order(&ex)?;

    println!("text:   {}", to_text(&reduced));
    println!("latex:  {}", to_latex(&reduced));
    println!("prefix: {}", to_prefix(&reduced));

    assert_eq!(
        parse(&to_prefix(&reduced), &ctx)?,
        Expression::Space(reduced.clone())
    );
    assert_eq!(
        parse(&to_text(&reduced), &ctx)?.canonicalize(),
        Expression::Space(reduced)
    );
    println!("both serializations parse back to the same canonical form");

    match parse("A(E_A(t,u)", &ctx) {
        Err(e) => println!("malformed input: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
