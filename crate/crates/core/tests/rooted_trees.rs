mod common;

use common::trees::rooted_tree_counts;
use flowsym::scenarios::{count_elementary_differentials, REFERENCE_COUNTS};

#[test]
fn enumerator_matches_known_prefix() {
    assert_eq!(rooted_tree_counts(8), vec![1, 1, 2, 4, 9, 20, 48, 115]);
}

#[test]
fn elementary_differentials_are_counted_by_rooted_trees() {
    let trees = rooted_tree_counts(12);
    let counts: Vec<usize> = count_elementary_differentials(12)
        .into_iter()
        .map(|(_, n)| n)
        .collect();
    assert_eq!(counts, trees);
    assert_eq!(&REFERENCE_COUNTS[..12], trees.as_slice());
}
