//! B-series weight maps over exact polynomials and the operators acting on
//! them: composition, the Jacobian action `∗`, the group inverse, the weights
//! of the exact numerical solution and of the three iteration schemes.

mod ops;
pub mod poly;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::tree::{enumerate_trees, subtree_pairs, FTree, Order, SubtreePair, Tree};

pub use ops::{
    compose, exact_method_weights, inverse, iterate, iterate_full_newton,
    iterate_modified_newton, iterate_simple, psi, star, Sweep,
};
pub use poly::{Increment, Poly, Sym};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("tree {tree} has order {order} beyond the cutoff {cutoff}")]
    BeyondCutoff {
        tree: String,
        order: Order,
        cutoff: Order,
    },
    #[error("operand cutoff {have} is below the requested cutoff {need}")]
    CutoffTooSmall { have: Order, need: Order },
    #[error("{0}: weight at the empty tree must be 1")]
    NotUnitAtEmpty(&'static str),
    #[error("{0}: weight at the empty tree must be 0")]
    NotZeroAtEmpty(&'static str),
    #[error("tree {0} uses a color outside the weight map's color set")]
    ColorOutOfRange(String),
}

/// Trees up to a cutoff order together with their subtree decompositions.
///
/// Trees are stored in canonical order, which sorts by node count first, so
/// every proper part of a tree is visited before the tree itself.
#[derive(Clone, Debug)]
pub struct Catalog {
    cutoff: Order,
    num_colors: u8,
    trees: Vec<Tree>,
    pairs: FxHashMap<Tree, Vec<SubtreePair>>,
}

impl Catalog {
    pub fn new(cutoff: Order, num_colors: u8) -> Self {
        let trees = enumerate_trees(cutoff, num_colors).by_node_count();
        let pairs = trees
            .iter()
            .map(|t| (t.clone(), subtree_pairs(t)))
            .collect();
        Catalog {
            cutoff,
            num_colors,
            trees,
            pairs,
        }
    }

    pub fn cutoff(&self) -> Order {
        self.cutoff
    }

    pub fn num_colors(&self) -> u8 {
        self.num_colors
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn pairs(&self, tree: &Tree) -> &[SubtreePair] {
        self.pairs.get(tree).map_or(&[], Vec::as_slice)
    }
}

/// A B-series weight map `φ : T → ℚ[symbols]`, defined on every tree up to
/// its cutoff order. Trees without an entry carry the weight zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    at_empty: Poly,
    table: FxHashMap<Tree, Poly>,
    cutoff: Order,
    num_colors: u8,
}

impl WeightMap {
    pub fn new(at_empty: Poly, cutoff: Order, num_colors: u8) -> Self {
        WeightMap {
            at_empty,
            table: FxHashMap::default(),
            cutoff,
            num_colors,
        }
    }

    /// The zero map.
    pub fn zero(cutoff: Order, num_colors: u8) -> Self {
        WeightMap::new(Poly::zero(), cutoff, num_colors)
    }

    /// The unit `e`: one at ∅, zero elsewhere. Also the trivial predictor.
    pub fn unit(cutoff: Order, num_colors: u8) -> Self {
        WeightMap::new(Poly::one(), cutoff, num_colors)
    }

    /// Independent indeterminates `make(τ)` on every catalog tree accepted
    /// by `keep`.
    pub fn generic<M, K>(at_empty: Poly, catalog: &Catalog, make: M, keep: K) -> Self
    where
        M: Fn(Tree) -> Sym,
        K: Fn(&Tree) -> bool,
    {
        let mut w = WeightMap::new(at_empty, catalog.cutoff(), catalog.num_colors());
        for t in catalog.trees() {
            if keep(t) {
                w.table.insert(t.clone(), Poly::var(make(t.clone())));
            }
        }
        w
    }

    pub fn cutoff(&self) -> Order {
        self.cutoff
    }

    pub fn num_colors(&self) -> u8 {
        self.num_colors
    }

    pub fn at_empty(&self) -> &Poly {
        &self.at_empty
    }

    fn check(&self, tree: &Tree) -> Result<(), AlgebraError> {
        if tree.rho() > self.cutoff {
            return Err(AlgebraError::BeyondCutoff {
                tree: tree.to_string(),
                order: tree.rho(),
                cutoff: self.cutoff,
            });
        }
        if tree.max_color() >= self.num_colors {
            return Err(AlgebraError::ColorOutOfRange(tree.to_string()));
        }
        Ok(())
    }

    pub fn get(&self, tree: &Tree) -> Result<&Poly, AlgebraError> {
        self.check(tree)?;
        Ok(self.table.get(tree).unwrap_or(Poly::zero_ref()))
    }

    /// Weight at `Some(τ)` or at the empty tree.
    pub fn at(&self, tree: Option<&Tree>) -> Result<&Poly, AlgebraError> {
        match tree {
            None => Ok(&self.at_empty),
            Some(t) => self.get(t),
        }
    }

    pub fn set(&mut self, tree: Tree, value: Poly) -> Result<(), AlgebraError> {
        self.check(&tree)?;
        if value.is_zero() {
            self.table.remove(&tree);
        } else {
            self.table.insert(tree, value);
        }
        Ok(())
    }

    /// Builder form of [`WeightMap::set`].
    pub fn with(mut self, tree: Tree, value: Poly) -> Result<Self, AlgebraError> {
        self.set(tree, value)?;
        Ok(self)
    }

    /// Trees with a nonzero weight.
    pub fn support(&self) -> Vec<&Tree> {
        let mut v: Vec<&Tree> = self.table.keys().collect();
        v.sort();
        v
    }

    /// Raises the cutoff, declaring every tree above the old cutoff to have
    /// weight zero. Only meaningful for maps with finite support such as the
    /// weights of a concrete scheme.
    pub fn extend_with_zeros(&self, cutoff: Order) -> WeightMap {
        let mut w = self.clone();
        w.cutoff = w.cutoff.max(cutoff);
        w
    }

    /// Restriction to a smaller cutoff.
    pub fn truncate(&self, cutoff: Order) -> WeightMap {
        let mut w = self.clone();
        w.table.retain(|t, _| t.rho() <= cutoff);
        w.cutoff = w.cutoff.min(cutoff);
        w
    }

    /// Sets the weight of every tree outside `T_0` to zero.
    pub fn restrict_to_deterministic_roots(&self) -> WeightMap {
        let mut w = self.clone();
        w.table.retain(|t, _| t.color() == 0);
        w
    }

    /// Applies `f` to every weight, including the one at ∅.
    pub fn map<F: Fn(&Poly) -> Poly>(&self, f: F) -> WeightMap {
        let mut w = WeightMap::new(f(&self.at_empty), self.cutoff, self.num_colors);
        for (t, p) in &self.table {
            let v = f(p);
            if !v.is_zero() {
                w.table.insert(t.clone(), v);
            }
        }
        w
    }

    pub fn add(&self, other: &WeightMap) -> WeightMap {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &WeightMap) -> WeightMap {
        self.combine(other, |a, b| a - b)
    }

    fn combine<F: Fn(&Poly, &Poly) -> Poly>(&self, other: &WeightMap, f: F) -> WeightMap {
        let cutoff = self.cutoff.min(other.cutoff);
        let mut w = WeightMap::new(
            f(&self.at_empty, &other.at_empty),
            cutoff,
            self.num_colors.min(other.num_colors),
        );
        let keys: Vec<&Tree> = self
            .table
            .keys()
            .chain(other.table.keys())
            .filter(|t| t.rho() <= cutoff)
            .collect();
        for t in keys {
            if w.table.contains_key(t) {
                continue;
            }
            let a = self.table.get(t).unwrap_or(Poly::zero_ref());
            let b = other.table.get(t).unwrap_or(Poly::zero_ref());
            let v = f(a, b);
            if !v.is_zero() {
                w.table.insert(t.clone(), v);
            }
        }
        w
    }

    /// First catalog tree where the maps differ. A difference at ∅ is
    /// reported as the first catalog tree.
    pub fn first_difference(&self, other: &WeightMap, catalog: &Catalog) -> Option<Tree> {
        if self.at_empty != other.at_empty {
            return catalog.trees().first().cloned();
        }
        catalog
            .trees()
            .iter()
            .find(|t| self.table.get(*t) != other.table.get(*t))
            .cloned()
    }

    /// Equality on ∅ and every catalog tree.
    pub fn agrees_on(&self, other: &WeightMap, catalog: &Catalog) -> bool {
        self.at_empty == other.at_empty
            && catalog
                .trees()
                .iter()
                .all(|t| self.table.get(t) == other.table.get(t))
    }
}

/// Shorthand for the value of `ψ_φ(u)` that only needs the children of `u`.
pub fn psi_of(phi: &WeightMap, children: &[Tree]) -> Result<Poly, AlgebraError> {
    psi(phi, &FTree::new(children.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_map() {
        let e = WeightMap::unit(Order::from_int(2), 2);
        assert!(e.at_empty().is_one());
        assert!(e.get(&Tree::leaf(1)).unwrap().is_zero());
    }

    #[test]
    fn queries_beyond_cutoff_fail() {
        let e = WeightMap::unit(Order::from_int(1), 2);
        let big = Tree::parse("[•1,•1]0").unwrap();
        assert!(matches!(
            e.get(&big),
            Err(AlgebraError::BeyondCutoff { .. })
        ));
        let colored = Tree::leaf(2);
        assert!(e.get(&colored).is_err());
    }

    #[test]
    fn setting_zero_keeps_table_sparse() {
        let mut w = WeightMap::zero(Order::from_int(1), 2);
        w.set(Tree::leaf(0), Poly::from_int(3)).unwrap();
        assert_eq!(w.support().len(), 1);
        w.set(Tree::leaf(0), Poly::zero()).unwrap();
        assert!(w.support().is_empty());
    }

    #[test]
    fn catalog_visits_parts_first() {
        let cat = Catalog::new(Order::from_twice(5), 2);
        let pos: FxHashMap<&Tree, usize> =
            cat.trees().iter().enumerate().map(|(i, t)| (t, i)).collect();
        for t in cat.trees() {
            for p in cat.pairs(t) {
                for d in &p.remainder {
                    if d != t {
                        assert!(pos[d] < pos[t]);
                    }
                }
            }
        }
    }
}
