use std::collections::{BTreeMap, BTreeSet};

mod common;
use common::{gamma_oracle, Labelled};

use proptest::prelude::*;
use sdeiter::tree::{enumerate_trees, subtree_pairs, single_remainder_pairs, Order, Tree};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Number of color- and edge-preserving node permutations.
fn automorphisms(t: &Tree) -> u64 {
    let lab = Labelled::from_tree(t);
    let n = lab.len();
    let edges: BTreeSet<(usize, usize)> = (1..n).map(|i| (lab.parent[i], i)).collect();
    permutations(n)
        .into_iter()
        .filter(|p| {
            p[0] == 0
                && (0..n).all(|i| lab.color[p[i]] == lab.color[i])
                && edges.iter().all(|&(a, b)| edges.contains(&(p[a], p[b])))
        })
        .count() as u64
}

/// All trees of order ≤ `max` by exhaustive labelled construction.
fn brute_force_trees(max: Order, colors: u8) -> BTreeSet<Tree> {
    let mut out = BTreeSet::new();
    let max_nodes = max.twice() as usize;
    for n in 1..=max_nodes {
        let mut parent = vec![usize::MAX; n];
        let mut color = vec![0u8; n];
        labelled_rec(1, n, &mut parent, &mut color, colors, max, &mut out);
    }
    out
}

fn labelled_rec(
    i: usize,
    n: usize,
    parent: &mut Vec<usize>,
    color: &mut Vec<u8>,
    colors: u8,
    max: Order,
    out: &mut BTreeSet<Tree>,
) {
    if i == n {
        let total = (0..colors).collect::<Vec<_>>();
        let mut assign = vec![0usize; n];
        loop {
            for (k, &a) in assign.iter().enumerate() {
                color[k] = total[a];
            }
            let lab = Labelled {
                color: color.clone(),
                parent: parent.clone(),
            };
            let t = lab.build(0, &|_| true);
            if t.rho() <= max {
                out.insert(t);
            }
            let mut k = 0;
            while k < n && assign[k] + 1 == total.len() {
                assign[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
            assign[k] += 1;
        }
        return;
    }
    for p in 0..i {
        parent[i] = p;
        labelled_rec(i + 1, n, parent, color, colors, max, out);
    }
}

fn t(s: &str) -> Tree {
    Tree::parse(s).unwrap()
}

#[test]
fn gamma_matches_ordered_tree_oracle() {
    for (order, colors) in [(Order::from_twice(5), 2), (Order::from_int(2), 3)] {
        let trees = enumerate_trees(order, colors);
        for tree in trees.iter() {
            let got: BTreeMap<_, _> = subtree_pairs(tree)
                .into_iter()
                .map(|p| ((p.subtree, p.remainder), p.gamma))
                .collect();
            assert_eq!(got, gamma_oracle(tree), "{tree}");
        }
    }
}

#[test]
fn single_remainder_pairs_are_a_subset() {
    for tree in enumerate_trees(Order::from_int(3), 2).iter() {
        let all = subtree_pairs(tree);
        for p in single_remainder_pairs(tree) {
            assert_eq!(p.remainder.len(), 1);
            assert!(all.contains(&p));
        }
    }
}

#[test]
fn enumeration_matches_brute_force() {
    for (order, colors) in [
        (Order::HALF, 2),
        (Order::from_int(2), 2),
        (Order::from_twice(5), 2),
        (Order::from_int(3), 2),
        (Order::from_int(2), 3),
    ] {
        let got: BTreeSet<Tree> = enumerate_trees(order, colors).iter().cloned().collect();
        assert_eq!(got, brute_force_trees(order, colors), "order {order}, {colors} colors");
    }
}

#[test]
fn enumeration_sizes() {
    let sizes: Vec<usize> = (1..=6)
        .map(|twice| enumerate_trees(Order::from_twice(twice), 2).len())
        .collect();
    assert_eq!(&sizes[..3], &[1, 3, 7]);
    assert!(sizes.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn symmetry_matches_automorphism_count() {
    for tree in enumerate_trees(Order::from_int(3), 2).iter() {
        assert_eq!(tree.symmetry(), automorphisms(tree), "{tree}");
    }
}

#[test]
fn notation_examples() {
    let tree = t("[•1,[•2,•2]1]0");
    assert_eq!(tree.node_count(), 5);
    assert_eq!(tree.color(), 0);
    assert_eq!(tree.max_color(), 2);
    assert_eq!(tree.max_arity(), 2);
    assert!(Tree::parse("[•1,•1").is_err());
    assert!(Tree::parse("").is_err());
    assert!(t("•0").is_deterministic());
    assert!(!t("[•1]0").is_deterministic());
}

fn arb_tree() -> impl Strategy<Value = Tree> {
    let all: Vec<Tree> = enumerate_trees(Order::from_int(3), 3).iter().cloned().collect();
    proptest::sample::select(all)
}

proptest! {
    #[test]
    fn display_parse_roundtrip(tree in arb_tree()) {
        prop_assert_eq!(Tree::parse(&tree.to_string()).unwrap(), tree.clone());
        prop_assert_eq!(Tree::from_encoding(&tree.encoding()).unwrap(), tree);
    }

    #[test]
    fn order_is_additive(a in arb_tree(), b in arb_tree()) {
        let joined = Tree::node(0, vec![a.clone(), b.clone()]);
        prop_assert_eq!(joined.rho().twice(), 2 + a.rho().twice() + b.rho().twice());
        prop_assert_eq!(joined.node_count(), 1 + a.node_count() + b.node_count());
    }
}
