// Term counts of successive time derivatives of a flow, one term per
// rooted tree.

use flowsym::render::to_text;
use flowsym::scenarios::{ElementaryDifferentials, REFERENCE_COUNTS};

pub fn main() -> flowsym::Result<()> {
    let mut it = ElementaryDifferentials::new();
    println!("order\tterms");
    for _ in 0..10 {
        let (order, terms) = it.next().expect("infinite");
        assert_eq!(terms, REFERENCE_COUNTS[order - 1]);
        println!("{order}\t{terms}");
        if order == 4 {
            println!("  {}", to_text(it.current()));
        }
    }
    Ok(())
}
