//! Brute-force enumeration of unlabeled rooted trees.
//!
//! A tree is kept as its canonical string: `(` + sorted child strings + `)`.
//! Trees with n+1 nodes are all ways of hanging a new leaf below some node
//! of a tree with n nodes, deduplicated by canonical form.

use std::collections::BTreeSet;

#[derive(Clone)]
struct Tree(Vec<Tree>);

impl Tree {
    fn canonical(&self) -> String {
        let mut kids: Vec<String> = self.0.iter().map(Tree::canonical).collect();
        kids.sort();
        format!("({})", kids.concat())
    }

    fn size(&self) -> usize {
        1 + self.0.iter().map(Tree::size).sum::<usize>()
    }

    /// Every tree obtained by adding one leaf.
    fn grow(&self) -> Vec<Tree> {
        let mut out = vec![{
            let mut t = self.clone();
            t.0.push(Tree(Vec::new()));
            t
        }];
        for (i, child) in self.0.iter().enumerate() {
            for g in child.grow() {
                let mut t = self.clone();
                t.0[i] = g;
                out.push(t);
            }
        }
        out
    }

    fn parse(s: &[u8], pos: &mut usize) -> Tree {
        assert_eq!(s[*pos], b'(');
        *pos += 1;
        let mut kids = Vec::new();
        while s[*pos] == b'(' {
            kids.push(Tree::parse(s, pos));
        }
        *pos += 1;
        Tree(kids)
    }
}

/// Number of rooted trees with 1..=max nodes.
pub fn rooted_tree_counts(max: usize) -> Vec<usize> {
    let mut level: BTreeSet<String> = BTreeSet::from(["()".to_string()]);
    let mut counts = vec![1];
    while counts.len() < max {
        let mut next = BTreeSet::new();
        for s in &level {
            let t = Tree::parse(s.as_bytes(), &mut 0);
            debug_assert_eq!(t.size(), counts.len());
            for g in t.grow() {
                next.insert(g.canonical());
            }
        }
        counts.push(next.len());
        level = next;
    }
    counts
}
