use rustc_hash::FxHashMap;

use super::{AlgebraError, Catalog, Poly, WeightMap};
use crate::tree::{FTree, SubtreePair, Tree};

/// Read access used by the per-tree formulas. Recursions that build a map
/// tree by tree read from a [`Partial`], which refuses lookups of trees that
/// have not been computed yet instead of reading them as zero.
trait Weights {
    fn at(&self, tree: Option<&Tree>) -> Result<&Poly, AlgebraError>;
}

impl Weights for WeightMap {
    fn at(&self, tree: Option<&Tree>) -> Result<&Poly, AlgebraError> {
        WeightMap::at(self, tree)
    }
}

struct Partial {
    at_empty: Poly,
    table: FxHashMap<Tree, Poly>,
}

impl Partial {
    fn new(at_empty: Poly) -> Self {
        Partial {
            at_empty,
            table: FxHashMap::default(),
        }
    }

    fn into_map(self, catalog: &Catalog) -> WeightMap {
        let mut w = WeightMap::new(self.at_empty, catalog.cutoff(), catalog.num_colors());
        for (t, p) in self.table {
            w.set(t, p).expect("catalog trees lie within the cutoff");
        }
        w
    }
}

impl Weights for Partial {
    fn at(&self, tree: Option<&Tree>) -> Result<&Poly, AlgebraError> {
        match tree {
            None => Ok(&self.at_empty),
            Some(t) => Ok(self
                .table
                .get(t)
                .unwrap_or_else(|| panic!("weight of {t} requested before it was computed"))),
        }
    }
}

/// `Σ_{ST(τ)} γ · y(ϑ) · ∏_{δ∈ω} x(δ)`; pairs with `y(ϑ) = 0` are skipped
/// before `x` is consulted.
fn compose_at(
    x: &impl Weights,
    y: &impl Weights,
    pairs: &[SubtreePair],
) -> Result<Poly, AlgebraError> {
    let mut acc = Poly::zero();
    for p in pairs {
        let yv = y.at(p.subtree.as_ref())?;
        if yv.is_zero() {
            continue;
        }
        let mut term = yv.scale_int(p.gamma);
        for d in &p.remainder {
            term = &term * x.at(Some(d))?;
            if term.is_zero() {
                break;
            }
        }
        acc += &term;
    }
    Ok(acc)
}

/// `(x ∗ y)(τ)` including the `x(∅)·y(τ)` term of the extension.
fn star_at(
    x: &impl Weights,
    y: &impl Weights,
    tree: &Tree,
    pairs: &[SubtreePair],
) -> Result<Poly, AlgebraError> {
    let mut acc = Poly::zero();
    for p in pairs.iter().filter(|p| p.is_single()) {
        let yv = y.at(p.subtree.as_ref())?;
        if yv.is_zero() {
            continue;
        }
        acc.add_product(
            &num_rational::BigRational::from_integer(p.gamma.into()),
            yv,
            x.at(Some(&p.remainder[0]))?,
        );
    }
    let x0 = x.at(None)?;
    if !x0.is_zero() {
        acc += &(x0 * y.at(Some(tree))?);
    }
    Ok(acc)
}

fn require_cutoff(catalog: &Catalog, maps: &[&WeightMap]) -> Result<(), AlgebraError> {
    for m in maps {
        if m.cutoff() < catalog.cutoff() {
            return Err(AlgebraError::CutoffTooSmall {
                have: m.cutoff(),
                need: catalog.cutoff(),
            });
        }
    }
    Ok(())
}

fn require_unit(m: &WeightMap, what: &'static str) -> Result<(), AlgebraError> {
    if m.at_empty().is_one() {
        Ok(())
    } else {
        Err(AlgebraError::NotUnitAtEmpty(what))
    }
}

fn require_zero(m: &WeightMap, what: &'static str) -> Result<(), AlgebraError> {
    if m.at_empty().is_zero() {
        Ok(())
    } else {
        Err(AlgebraError::NotZeroAtEmpty(what))
    }
}

/// Composition `x ∘ y`, the weights of `B(y, B(x, y0))`.
pub fn compose(x: &WeightMap, y: &WeightMap, catalog: &Catalog) -> Result<WeightMap, AlgebraError> {
    require_unit(x, "compose: left operand")?;
    require_cutoff(catalog, &[x, y])?;
    let mut out = WeightMap::new(y.at_empty().clone(), catalog.cutoff(), catalog.num_colors());
    for t in catalog.trees() {
        out.set(t.clone(), compose_at(x, y, catalog.pairs(t))?)?;
    }
    Ok(out)
}

/// Group inverse with respect to `∘`, solved by increasing node count.
pub fn inverse(phi: &WeightMap, catalog: &Catalog) -> Result<WeightMap, AlgebraError> {
    require_unit(phi, "inverse")?;
    require_cutoff(catalog, &[phi])?;
    let mut inv = Partial::new(Poly::one());
    for t in catalog.trees() {
        // (φ∘φ⁻¹)(τ) = 0 with the (τ, ∅) term φ⁻¹(τ) moved to the left
        let mut acc = Poly::zero();
        for p in catalog.pairs(t) {
            if p.subtree.as_ref() == Some(t) {
                continue;
            }
            let yv = inv.at(p.subtree.as_ref())?;
            if yv.is_zero() {
                continue;
            }
            let mut term = yv.scale_int(p.gamma);
            for d in &p.remainder {
                term = &term * phi.get(d)?;
                if term.is_zero() {
                    break;
                }
            }
            acc -= &term;
        }
        inv.table.insert(t.clone(), acc);
    }
    Ok(inv.into_map(catalog))
}

/// The bilinear operator `x ∗ y`, extended to `x(∅) ≠ 0` by
/// `((x − x(∅)e) ∗ y)(τ) + x(∅) y(τ)`.
pub fn star(x: &WeightMap, y: &WeightMap, catalog: &Catalog) -> Result<WeightMap, AlgebraError> {
    require_cutoff(catalog, &[x, y])?;
    let at_empty = x.at_empty() * y.at_empty();
    let mut out = WeightMap::new(at_empty, catalog.cutoff(), catalog.num_colors());
    for t in catalog.trees() {
        out.set(t.clone(), star_at(x, y, t, catalog.pairs(t))?)?;
    }
    Ok(out)
}

/// Weights Φ of the exact solution of the implicit one-step equation:
/// `Φ = Φex + Φ ∘ Φim`.
pub fn exact_method_weights(
    ex: &WeightMap,
    im: &WeightMap,
    catalog: &Catalog,
) -> Result<WeightMap, AlgebraError> {
    require_unit(ex, "exact_method_weights: explicit part")?;
    require_zero(im, "exact_method_weights: implicit part")?;
    require_cutoff(catalog, &[ex, im])?;
    let mut phi = Partial::new(Poly::one());
    for t in catalog.trees() {
        let mut v = compose_at(&phi, im, catalog.pairs(t))?;
        v += ex.get(t)?;
        phi.table.insert(t.clone(), v);
    }
    Ok(phi.into_map(catalog))
}

fn iteration_pre(
    prev: &WeightMap,
    ex: &WeightMap,
    im: &WeightMap,
    catalog: &Catalog,
    what: &'static str,
) -> Result<(), AlgebraError> {
    require_unit(prev, what)?;
    require_unit(ex, what)?;
    require_zero(im, what)?;
    require_cutoff(catalog, &[prev, ex, im])
}

/// One sweep of simple iteration: `Φk+1 = Φex + Φk ∘ Φim`.
pub fn iterate_simple(
    prev: &WeightMap,
    ex: &WeightMap,
    im: &WeightMap,
    catalog: &Catalog,
) -> Result<WeightMap, AlgebraError> {
    iteration_pre(prev, ex, im, catalog, "iterate_simple")?;
    let mut out = WeightMap::unit(catalog.cutoff(), catalog.num_colors());
    for t in catalog.trees() {
        let mut v = compose_at(prev, im, catalog.pairs(t))?;
        v += ex.get(t)?;
        out.set(t.clone(), v)?;
    }
    Ok(out)
}

/// One sweep of modified Newton iteration:
/// `Φk+1 = Φex + Φk ∘ Φim + (Φk+1 − Φk) ∗ Φim`.
pub fn iterate_modified_newton(
    prev: &WeightMap,
    ex: &WeightMap,
    im: &WeightMap,
    catalog: &Catalog,
) -> Result<WeightMap, AlgebraError> {
    iteration_pre(prev, ex, im, catalog, "iterate_modified_newton")?;
    let mut next = Partial::new(Poly::one());
    let mut diff = Partial::new(Poly::zero());
    for t in catalog.trees() {
        let pairs = catalog.pairs(t);
        let mut v = compose_at(prev, im, pairs)?;
        v += &star_at(&diff, im, t, pairs)?;
        v += ex.get(t)?;
        diff.table.insert(t.clone(), &v - prev.get(t)?);
        next.table.insert(t.clone(), v);
    }
    Ok(next.into_map(catalog))
}

/// One sweep of full Newton iteration:
/// `Φk+1 = Φex + Φk ∘ ((Φk⁻¹ ∘ Φk+1) ∗ Φim)`.
pub fn iterate_full_newton(
    prev: &WeightMap,
    ex: &WeightMap,
    im: &WeightMap,
    catalog: &Catalog,
) -> Result<WeightMap, AlgebraError> {
    iteration_pre(prev, ex, im, catalog, "iterate_full_newton")?;
    let inv = inverse(prev, catalog)?;
    let mut next = Partial::new(Poly::one());
    // Ψ = Φk⁻¹ ∘ Φk+1 and S = Ψ ∗ Φim, built alongside Φk+1
    let mut big_psi = Partial::new(Poly::one());
    let mut s = Partial::new(Poly::zero());
    for t in catalog.trees() {
        let pairs = catalog.pairs(t);
        let sv = star_at(&big_psi, im, t, pairs)?;
        s.table.insert(t.clone(), sv);
        let mut v = compose_at(prev, &s, pairs)?;
        v += ex.get(t)?;
        next.table.insert(t.clone(), v);
        let pv = compose_at(&inv, &next, pairs)?;
        big_psi.table.insert(t.clone(), pv);
    }
    Ok(next.into_map(catalog))
}

/// Which iteration operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sweep {
    Simple,
    ModifiedNewton,
    FullNewton,
}

/// `k` sweeps of the chosen operator starting from `start`.
pub fn iterate(
    sweep: Sweep,
    start: &WeightMap,
    ex: &WeightMap,
    im: &WeightMap,
    k: usize,
    catalog: &Catalog,
) -> Result<Vec<WeightMap>, AlgebraError> {
    let mut out = vec![start.clone()];
    for _ in 0..k {
        let prev = out.last().expect("nonempty");
        let next = match sweep {
            Sweep::Simple => iterate_simple(prev, ex, im, catalog)?,
            Sweep::ModifiedNewton => iterate_modified_newton(prev, ex, im, catalog)?,
            Sweep::FullNewton => iterate_full_newton(prev, ex, im, catalog)?,
        };
        out.push(next);
    }
    Ok(out)
}

/// `ψ_φ(u) = ∏ φ(τ_j)` over the children of `u`.
pub fn psi(phi: &WeightMap, u: &FTree) -> Result<Poly, AlgebraError> {
    let mut acc = Poly::one();
    for c in u.children() {
        acc = &acc * phi.get(c)?;
    }
    Ok(acc)
}
