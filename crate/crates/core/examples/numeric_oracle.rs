// Evaluating expressions on polynomial vector fields: a nonzero witness,
// a fixed field file, and random grounding of a check.

use flowsym::numeric::{evaluate, Bindings, EvaluationConfig, FieldSpec, Oracle};
use flowsym::scenarios::{run_check, CheckId};
use flowsym::{apply, flow, Context};

pub fn main() -> flowsym::Result<()> {
    let spec = FieldSpec::parse("dim 2\nfield A\nx2\n-x1\n")?;
    let mut ctx = Context::new();
    let t = ctx.time_vars(&["t"])?.remove(0);
    let u = ctx.space_vars(&["u"])?.remove(0);
    let a = ctx.functions(&["A"])?.remove(0);

    // rotation by a quarter turn
    let mut b = Bindings::default();
    b.fields.insert("A".into(), spec.fields["A"].clone());
    b.times.insert("t".into(), std::f64::consts::FRAC_PI_2);
    b.points.insert("u".into(), vec![1.0, 0.0]);
    let y = evaluate(&flow(&a, &t, &u, &[])?, &b, &EvaluationConfig::default())?;
    println!("E_A(pi/2, (1,0)) = ({:.6}, {:.6})", y[0], y[1]);

    let identity = apply(&a, &flow(&a, &t, &u, &[])?, &[])? - flow(&a, &t, &u, &[apply(&a, &u, &[])?])?;
    println!(
        "fundamental identity: {:?}",
        Oracle::default().with_seed(1).assert_zero(&identity, 10)?
    );
    println!(
        "A(u):                 {:?}",
        Oracle::default().assert_zero(&apply(&a, &u, &[])?, 10)?
    );

    let r = run_check(CheckId::Check5)?;
    let z = Oracle::default()
        .with_seed(7)
        .with_relations(&r.relations)
        .assert_zero(r.difference(), 10)?;
    println!(
        "check5 difference on random cubic fields: max norm {:.2e}, passed {}",
        z.max_norm, z.passed
    );
    Ok(())
}
