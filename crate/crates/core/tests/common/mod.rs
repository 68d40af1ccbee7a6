//! Oracles shared by the integration tests.
#![allow(dead_code)]

pub mod coherence;

use std::collections::BTreeMap;

use sdeiter::tree::Tree;

/// A tree with numbered nodes; node 0 is the root and `parent[i] < i`.
pub struct Labelled {
    pub color: Vec<u8>,
    pub parent: Vec<usize>,
}

impl Labelled {
    pub fn from_tree(t: &Tree) -> Self {
        let mut out = Labelled {
            color: vec![t.color()],
            parent: vec![usize::MAX],
        };
        out.push_children(t, 0);
        out
    }

    fn push_children(&mut self, t: &Tree, at: usize) {
        for c in t.children() {
            let id = self.color.len();
            self.color.push(c.color());
            self.parent.push(at);
            self.push_children(c, id);
        }
    }

    pub fn len(&self) -> usize {
        self.color.len()
    }

    /// The tree spanned by `root` and those of its descendants kept by `keep`.
    pub fn build(&self, root: usize, keep: &dyn Fn(usize) -> bool) -> Tree {
        let children = (root + 1..self.len())
            .filter(|&i| self.parent[i] == root && keep(i))
            .map(|i| self.build(i, keep))
            .collect();
        Tree::node(self.color[root], children)
    }
}

/// γ by brute force: every root-closed node subset is one ordered term.
pub fn gamma_oracle(t: &Tree) -> BTreeMap<(Option<Tree>, Vec<Tree>), u64> {
    let lab = Labelled::from_tree(t);
    let n = lab.len();
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let inside = |i: usize| mask & (1 << i) != 0;
        let closed = (1..n).all(|i| !inside(i) || inside(lab.parent[i]));
        if mask != 0 && (!inside(0) || !closed) {
            continue;
        }
        let (theta, mut omega) = if mask == 0 {
            (None, vec![t.clone()])
        } else {
            let theta = lab.build(0, &inside);
            let omega: Vec<Tree> = (1..n)
                .filter(|&i| !inside(i) && inside(lab.parent[i]))
                .map(|i| lab.build(i, &|_| true))
                .collect();
            (Some(theta), omega)
        };
        omega.sort();
        *out.entry((theta, omega)).or_insert(0) += 1;
    }
    out
}
