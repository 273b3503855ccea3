// The splitting defect identities and the Jacobi identity, each reduced
// to a syntactic zero.

use flowsym::render::to_text;
use flowsym::scenarios::{build_lie_trotter, lie_trotter_context, run_check, CheckId};

pub fn main() -> flowsym::Result<()> {
    let lt = build_lie_trotter(&lie_trotter_context())?;
    println!("S(t,u)      = {}", to_text(&lt.s));
    println!("S1~(t,v)    = {}", to_text(&lt.s1_tilde));

    for id in CheckId::ALL {
        let r = run_check(id)?;
        let steps: Vec<&str> = r.steps.iter().map(|(s, _)| s.as_str()).collect();
        println!(
            "{id:8} {:>4} terms -> residual {} via {}",
            r.difference().term_count(),
            to_text(&r.residual),
            steps.join(" > ")
        );
    }
    Ok(())
}
