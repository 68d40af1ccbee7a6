//! Symbolic check that iterated weights settle exactly when the growth
//! function predicts.

use thiserror::Error;

use crate::algebra::{exact_method_weights, iterate, AlgebraError, Catalog, Poly, Sweep, Sym, WeightMap};
use crate::growth::{growth, GrowthError, ImplicitnessClass, IterationKind};
use crate::tree::{Order, Tree};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

/// A tree where `Φ_k(τ) = Φ(τ)` disagrees with `𝔤(τ) ≤ k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub k: usize,
    pub tree: Tree,
    pub growth: u32,
    /// Whether `Φ_k(τ)` equals `Φ(τ)`.
    pub settled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessReport {
    pub iteration: IterationKind,
    pub class: ImplicitnessClass,
    pub trees: usize,
    pub max_k: usize,
    pub mismatches: Vec<Mismatch>,
}

impl SharpnessReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn sweep_for(it: IterationKind) -> Sweep {
    match it {
        IterationKind::Simple => Sweep::Simple,
        IterationKind::ModifiedNewton => Sweep::ModifiedNewton,
        IterationKind::FullNewton => Sweep::FullNewton,
    }
}

/// Iterates generic indeterminate weights from the trivial predictor and
/// compares, for every tree up to `max_order` and `k = 0..=max_k`, whether
/// `Φ_k(τ) = Φ(τ)` holds exactly when `𝔤(τ) ≤ k`.
///
/// The semi-implicit class keeps implicit weights only on trees with a
/// deterministic root; the deterministic class uses drift trees only.
pub fn growth_sharpness(
    max_order: Order,
    it: IterationKind,
    class: ImplicitnessClass,
    max_k: usize,
) -> Result<SharpnessReport, VerifyError> {
    let colors = if class == ImplicitnessClass::Deterministic { 1 } else { 2 };
    let catalog = Catalog::new(max_order, colors);
    let semi = class == ImplicitnessClass::SemiImplicit;
    let ex = WeightMap::generic(Poly::one(), &catalog, Sym::Ex, |_| true);
    let im = WeightMap::generic(Poly::zero(), &catalog, Sym::Im, |t| !semi || t.color() == 0);
    let phi = exact_method_weights(&ex, &im, &catalog)?;
    let start = WeightMap::unit(max_order, colors);
    let iterates = iterate(sweep_for(it), &start, &ex, &im, max_k, &catalog)?;
    let mut mismatches = Vec::new();
    for (k, phik) in iterates.iter().enumerate() {
        for tree in catalog.trees() {
            let g = growth(tree, it, class)?;
            let settled = phik.get(tree)? == phi.get(tree)?;
            if settled != (g as usize <= k) {
                mismatches.push(Mismatch {
                    k,
                    tree: tree.clone(),
                    growth: g,
                    settled,
                });
            }
        }
    }
    Ok(SharpnessReport {
        iteration: it,
        class,
        trees: catalog.trees().len(),
        max_k,
        mismatches,
    })
}
