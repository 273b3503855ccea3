// The fundamental identity and its differentiated forms.

use flowsym::render::to_text;
use flowsym::rewrite::{def2fe, fe2def, reduce_order, reduction_identity};
use flowsym::{apply, flow, Context};

pub fn main() -> flowsym::Result<()> {
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t"])?.remove(0);
    let x = ctx.space_vars(&["u", "v", "w"])?;
    let a = ctx.functions(&["A"])?.remove(0);
    let (u, v, w) = (&x[0], &x[1], &x[2]);
    let au = apply(&a, u, &[])?;

    let fe = apply(&a, &flow(&a, &t, u, &[])?, &[])?;
    let def = fe2def(&fe)?;
    println!(
        "{}  ->  {}  ->  {}",
        to_text(&fe.canonicalize()),
        to_text(&def),
        to_text(&def2fe(&def)?)
    );

    for slots in [
        vec![au.clone()],
        vec![au.clone(), v.clone()],
        vec![au, v.clone(), w.clone()],
    ] {
        let ex = flow(&a, &t, u, &slots)?;
        println!(
            "{}\n  = {}",
            to_text(&ex.canonicalize()),
            to_text(&reduce_order(&ex)?)
        );
    }

    let id = reduction_identity(4);
    println!("order 4 identity has {} terms on the right", id.rhs.term_count());
    Ok(())
}
