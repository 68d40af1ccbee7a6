//! Multicolored rooted trees.
//!
//! A tree is either empty or a root of some color `l` carrying a multiset of
//! nonempty subtrees. Color `0` marks a deterministic (drift) node, colors
//! `1..=m` mark stochastic nodes belonging to the noise channels. The empty
//! tree is never stored inside [`Tree`]; callers represent it as `None`
//! wherever it can occur (subtree slots, the value of a weight map at ∅).
//!
//! Children are always kept in canonical order, so structurally equal trees
//! are equal as values and hash identically.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rustc_hash::FxHashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("color {color} exceeds the configured noise dimension {noise_dim}")]
    ColorOutOfRange { color: u8, noise_dim: u8 },
    #[error("malformed tree notation `{0}`")]
    Parse(String),
    #[error("malformed order `{0}`")]
    BadOrder(String),
}

/// A nonnegative half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(u32);

impl Order {
    pub const ZERO: Order = Order(0);
    pub const HALF: Order = Order(1);

    pub const fn from_twice(twice: u32) -> Self {
        Order(twice)
    }

    pub const fn from_int(k: u32) -> Self {
        Order(2 * k)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// ⌊self⌋
    pub fn floor(self) -> u32 {
        self.0 / 2
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn plus_half(self) -> Order {
        Order(self.0 + 1)
    }
}

impl std::ops::Add for Order {
    type Output = Order;
    fn add(self, rhs: Order) -> Order {
        Order(self.0 + rhs.0)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Order {
    type Err = TreeError;

    /// Accepts `3`, `2.5`, `5/2` and `0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TreeError::BadOrder(s.to_string());
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(Order(2 * num)),
                "2" => Ok(Order(num)),
                _ => Err(bad()),
            }
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            let twice = 2.0 * x;
            if !(0.0..=1e6).contains(&twice) || twice.fract() != 0.0 {
                return Err(bad());
            }
            Ok(Order(twice as u32))
        }
    }
}

/// Contribution of a single node of the given color to the order.
pub fn node_weight(color: u8) -> u32 {
    if color == 0 {
        2
    } else {
        1
    }
}

/// A nonempty multicolored rooted tree in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    color: u8,
    children: Vec<Tree>,
    nodes: u32,
    twice_rho: u32,
}

impl Ord for Tree {
    /// Canonical order: node count, order, root color, then the children
    /// lexicographically (each already canonical).
    fn cmp(&self, other: &Self) -> Ordering {
        self.nodes
            .cmp(&other.nodes)
            .then(self.twice_rho.cmp(&other.twice_rho))
            .then(self.color.cmp(&other.color))
            .then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Tree {
    /// The single node `•_l`.
    pub fn leaf(color: u8) -> Self {
        Tree {
            color,
            children: Vec::new(),
            nodes: 1,
            twice_rho: node_weight(color),
        }
    }

    /// `[children]_color`, canonicalizing the child order.
    pub fn node(color: u8, mut children: Vec<Tree>) -> Self {
        children.sort();
        let nodes = 1 + children.iter().map(|c| c.nodes).sum::<u32>();
        let twice_rho = node_weight(color) + children.iter().map(|c| c.twice_rho).sum::<u32>();
        Tree {
            color,
            children,
            nodes,
            twice_rho,
        }
    }

    /// As [`Tree::node`], rejecting colors above the noise dimension `m`.
    pub fn checked(color: u8, children: Vec<Tree>, noise_dim: u8) -> Result<Self, TreeError> {
        let t = Tree::node(color, children);
        t.check_colors(noise_dim)?;
        Ok(t)
    }

    pub fn check_colors(&self, noise_dim: u8) -> Result<(), TreeError> {
        let max = self.max_color();
        if max > noise_dim {
            return Err(TreeError::ColorOutOfRange {
                color: max,
                noise_dim,
            });
        }
        Ok(())
    }

    pub fn color(&self) -> u8 {
        self.color
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    pub fn node_count(&self) -> u32 {
        self.nodes
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// ρ(τ): one per deterministic node, one half per stochastic node.
    pub fn rho(&self) -> Order {
        Order(self.twice_rho)
    }

    pub fn max_color(&self) -> u8 {
        self.children
            .iter()
            .map(Tree::max_color)
            .fold(self.color, u8::max)
    }

    /// True if every node is deterministic.
    pub fn is_deterministic(&self) -> bool {
        self.max_color() == 0
    }

    /// Order of the automorphism group, i.e. 1/α(τ).
    pub fn symmetry(&self) -> u64 {
        let mut s = 1u64;
        for (child, mult) in group_equal(&self.children) {
            s *= factorial(mult) * child.symmetry().pow(mult as u32);
        }
        s
    }

    /// α(τ) = 1 / (r₁!⋯r_q!) ∏ α(τ_j).
    pub fn alpha(&self) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(self.symmetry()))
    }

    /// Maximal number of children of any node; the derivative order needed
    /// to evaluate the elementary differential.
    pub fn max_arity(&self) -> usize {
        self.children
            .iter()
            .map(Tree::max_arity)
            .fold(self.children.len(), usize::max)
    }

    /// Level sequence with colors: preorder tokens `depth:color`.
    pub fn encoding(&self) -> String {
        let mut parts = Vec::with_capacity(self.nodes as usize);
        self.encode_into(0, &mut parts);
        parts.join(",")
    }

    fn encode_into(&self, depth: usize, out: &mut Vec<String>) {
        out.push(format!("{depth}:{}", self.color));
        for c in &self.children {
            c.encode_into(depth + 1, out);
        }
    }

    /// Inverse of [`Tree::encoding`].
    pub fn from_encoding(s: &str) -> Result<Tree, TreeError> {
        let bad = || TreeError::Parse(s.to_string());
        let mut levels = Vec::new();
        for tok in s.split(',') {
            let (d, c) = tok.trim().split_once(':').ok_or_else(bad)?;
            let d: usize = d.parse().map_err(|_| bad())?;
            let c: u8 = c.parse().map_err(|_| bad())?;
            levels.push((d, c));
        }
        if levels.first().map(|l| l.0) != Some(0) {
            return Err(bad());
        }
        let mut pos = 0;
        let t = build_from_levels(&levels, &mut pos, 0).ok_or_else(bad)?;
        if pos != levels.len() {
            return Err(bad());
        }
        Ok(t)
    }

    /// Bracket notation as used in the literature: `•1`, `[•1,•1]0`.
    pub fn parse(s: &str) -> Result<Tree, TreeError> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_bracket(&chars, &mut pos).ok_or_else(|| TreeError::Parse(s.to_string()))?;
        if pos != chars.len() {
            return Err(TreeError::Parse(s.to_string()));
        }
        Ok(t)
    }
}

fn build_from_levels(levels: &[(usize, u8)], pos: &mut usize, depth: usize) -> Option<Tree> {
    let (d, color) = *levels.get(*pos)?;
    if d != depth {
        return None;
    }
    *pos += 1;
    let mut children = Vec::new();
    while let Some(&(d, _)) = levels.get(*pos) {
        if d <= depth {
            break;
        }
        children.push(build_from_levels(levels, pos, depth + 1)?);
    }
    Some(Tree::node(color, children))
}

fn parse_color(chars: &[char], pos: &mut usize) -> Option<u8> {
    let start = *pos;
    while *pos < chars.len() && chars[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    chars[start..*pos].iter().collect::<String>().parse().ok()
}

fn parse_bracket(chars: &[char], pos: &mut usize) -> Option<Tree> {
    match chars.get(*pos)? {
        '•' | '*' => {
            *pos += 1;
            Some(Tree::leaf(parse_color(chars, pos)?))
        }
        '[' => {
            *pos += 1;
            let mut children = vec![parse_bracket(chars, pos)?];
            loop {
                match chars.get(*pos)? {
                    ',' => {
                        *pos += 1;
                        children.push(parse_bracket(chars, pos)?);
                    }
                    ']' => {
                        *pos += 1;
                        break;
                    }
                    _ => return None,
                }
            }
            Some(Tree::node(parse_color(chars, pos)?, children))
        }
        _ => None,
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "•{}", self.color);
        }
        write!(f, "[")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]{}", self.color)
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A tree whose root has the formal color `f`, used in the expansion of a
/// functional of a B-series. May have no children (`[∅]_f`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FTree {
    children: Vec<Tree>,
}

impl FTree {
    pub fn new(mut children: Vec<Tree>) -> Self {
        children.sort();
        FTree { children }
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn rho(&self) -> Order {
        self.children.iter().fold(Order::ZERO, |acc, c| acc + c.rho())
    }
}

/// Groups consecutive equal entries of a sorted slice.
pub(crate) fn group_equal(sorted: &[Tree]) -> Vec<(&Tree, usize)> {
    let mut out: Vec<(&Tree, usize)> = Vec::new();
    for t in sorted {
        match out.last_mut() {
            Some((last, n)) if *last == t => *n += 1,
            _ => out.push((t, 1)),
        }
    }
    out
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All canonical nonempty trees up to a given order, grouped by order.
#[derive(Clone, Debug)]
pub struct TreeEnumeration {
    num_colors: u8,
    /// `by_twice_order[n]` holds the trees with 2ρ = n; index 0 is empty.
    by_twice_order: Vec<Vec<Tree>>,
}

impl TreeEnumeration {
    pub fn num_colors(&self) -> u8 {
        self.num_colors
    }

    pub fn max_order(&self) -> Order {
        Order((self.by_twice_order.len() - 1) as u32)
    }

    pub fn of_order(&self, order: Order) -> &[Tree] {
        self.by_twice_order
            .get(order.twice() as usize)
            .map_or(&[], Vec::as_slice)
    }

    /// All trees in increasing order, canonical order within each group.
    pub fn iter(&self) -> impl Iterator<Item = &Tree> {
        self.by_twice_order.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_twice_order.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted by node count first, so that every proper part of a tree
    /// precedes the tree itself.
    pub fn by_node_count(&self) -> Vec<Tree> {
        let mut v: Vec<Tree> = self.iter().cloned().collect();
        v.sort();
        v
    }
}

/// Enumerates every canonical tree with ρ(τ) ≤ `max_order` over colors
/// `0..num_colors`.
pub fn enumerate_trees(max_order: Order, num_colors: u8) -> TreeEnumeration {
    let max = max_order.twice() as usize;
    let mut by_twice_order: Vec<Vec<Tree>> = vec![Vec::new(); max + 1];
    // pool of all trees found so far, in canonical order
    let mut pool: Vec<Tree> = Vec::new();
    for n in 1..=max {
        let mut found = Vec::new();
        for color in 0..num_colors {
            let w = node_weight(color) as usize;
            if w > n {
                continue;
            }
            let mut current = Vec::new();
            child_multisets(&pool, 0, n - w, &mut current, &mut |children| {
                found.push(Tree::node(color, children.to_vec()));
            });
        }
        found.sort();
        pool.extend(found.iter().cloned());
        pool.sort();
        by_twice_order[n] = found;
    }
    TreeEnumeration {
        num_colors,
        by_twice_order,
    }
}

fn child_multisets(
    pool: &[Tree],
    start: usize,
    remaining: usize,
    current: &mut Vec<Tree>,
    emit: &mut dyn FnMut(&[Tree]),
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    for i in start..pool.len() {
        let r = pool[i].twice_rho as usize;
        if r > remaining {
            continue;
        }
        current.push(pool[i].clone());
        child_multisets(pool, i, remaining - r, current, emit);
        current.pop();
    }
}

/// One term `(ϑ, ω)` of the subtree decomposition `ST(τ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubtreePair {
    /// ϑ, the subtree sharing the root; `None` is the empty tree.
    pub subtree: Option<Tree>,
    /// ω, the trees left over after removing ϑ, sorted.
    pub remainder: Vec<Tree>,
    /// γ(τ, ϑ, ω) ≥ 1.
    pub gamma: u64,
}

impl SubtreePair {
    /// Member of `SP(τ)`: exactly one tree is left over.
    pub fn is_single(&self) -> bool {
        self.remainder.len() == 1
    }

    pub fn node_count(&self) -> u32 {
        self.subtree.as_ref().map_or(0, Tree::node_count)
            + self.remainder.iter().map(Tree::node_count).sum::<u32>()
    }
}

type PairKey = (Option<Tree>, Vec<Tree>);

/// All distinct pairs of `ST(τ)` with their composition coefficients γ.
///
/// Identical children are grouped; for a group of `R` copies the choices are
/// multisets over `ST` of that child, weighted by `R!/∏ r_i! · ∏ γ_i^{r_i}`.
/// Removing a whole child (its `(∅, {child})` choice) leaves it as a remainder
/// tree attached directly to the root.
pub fn subtree_pairs(tree: &Tree) -> Vec<SubtreePair> {
    let mut memo = FxHashMap::default();
    pairs_memo(tree, &mut memo)
}

fn pairs_memo(tree: &Tree, memo: &mut FxHashMap<Tree, Vec<SubtreePair>>) -> Vec<SubtreePair> {
    if let Some(p) = memo.get(tree) {
        return p.clone();
    }
    // (ϑ children, ω, γ) partial products over the child groups
    let mut partial: Vec<(Vec<Tree>, Vec<Tree>, u64)> = vec![(Vec::new(), Vec::new(), 1)];
    for (child, copies) in group_equal(&tree.children) {
        let choices = pairs_memo(child, memo);
        let mut counts = vec![0usize; choices.len()];
        let mut next = Vec::new();
        for_each_composition(&mut counts, 0, copies, &mut |counts| {
            let mut multinomial = factorial(copies);
            let mut weight = 1u64;
            let mut theta = Vec::new();
            let mut omega = Vec::new();
            for (choice, &r) in choices.iter().zip(counts.iter()) {
                if r == 0 {
                    continue;
                }
                multinomial /= factorial(r);
                weight *= choice.gamma.pow(r as u32);
                for _ in 0..r {
                    if let Some(s) = &choice.subtree {
                        theta.push(s.clone());
                    }
                    omega.extend(choice.remainder.iter().cloned());
                }
            }
            let coeff = multinomial * weight;
            for (pt, po, pg) in &partial {
                let mut t = pt.clone();
                t.extend(theta.iter().cloned());
                let mut o = po.clone();
                o.extend(omega.iter().cloned());
                next.push((t, o, pg * coeff));
            }
        });
        partial = next;
    }
    let mut acc: FxHashMap<PairKey, u64> = FxHashMap::default();
    for (theta, mut omega, gamma) in partial {
        omega.sort();
        *acc.entry((Some(Tree::node(tree.color, theta)), omega))
            .or_insert(0) += gamma;
    }
    *acc.entry((None, vec![tree.clone()])).or_insert(0) += 1;
    let mut out: Vec<SubtreePair> = acc
        .into_iter()
        .map(|((subtree, remainder), gamma)| SubtreePair {
            subtree,
            remainder,
            gamma,
        })
        .collect();
    out.sort();
    memo.insert(tree.clone(), out.clone());
    out
}

/// Calls `f` with every vector of nonnegative counts summing to `total`.
fn for_each_composition(
    counts: &mut [usize],
    idx: usize,
    total: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    if idx + 1 == counts.len() {
        counts[idx] = total;
        f(counts);
        counts[idx] = 0;
        return;
    }
    for r in 0..=total {
        counts[idx] = r;
        for_each_composition(counts, idx + 1, total - r, f);
    }
    counts[idx] = 0;
}

/// `SP(τ)`: the pairs of `ST(τ)` with a single remainder tree.
pub fn single_remainder_pairs(tree: &Tree) -> Vec<SubtreePair> {
    subtree_pairs(tree)
        .into_iter()
        .filter(SubtreePair::is_single)
        .collect()
}
