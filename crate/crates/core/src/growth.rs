//! Growth functions of the iteration schemes and the iteration counts they
//! imply.
//!
//! A growth function `𝔤` assigns each tree the number of iterations after
//! which the iterated weight `Φ_k(τ)` has settled to the weight of the exact
//! implicit solution. The maximum over trees up to a given order gives the
//! number of iterations needed for that order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tree::{FTree, Order, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IterationKind {
    Simple,
    ModifiedNewton,
    FullNewton,
}

impl IterationKind {
    pub const ALL: [IterationKind; 3] = [
        IterationKind::Simple,
        IterationKind::ModifiedNewton,
        IterationKind::FullNewton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IterationKind::Simple => "simple",
            IterationKind::ModifiedNewton => "modified",
            IterationKind::FullNewton => "full",
        }
    }
}

impl fmt::Display for IterationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IterationKind {
    type Err = GrowthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(IterationKind::Simple),
            "modified" | "modified-newton" => Ok(IterationKind::ModifiedNewton),
            "full" | "full-newton" | "newton" => Ok(IterationKind::FullNewton),
            _ => Err(GrowthError::UnknownName(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImplicitnessClass {
    General,
    /// `Φim(τ) = 0` for every tree with a stochastic root.
    SemiImplicit,
    /// No noise: only trees with color 0.
    Deterministic,
}

impl ImplicitnessClass {
    pub const ALL: [ImplicitnessClass; 3] = [
        ImplicitnessClass::General,
        ImplicitnessClass::SemiImplicit,
        ImplicitnessClass::Deterministic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImplicitnessClass::General => "full",
            ImplicitnessClass::SemiImplicit => "semi",
            ImplicitnessClass::Deterministic => "deterministic",
        }
    }
}

impl fmt::Display for ImplicitnessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImplicitnessClass {
    type Err = GrowthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" | "general" => Ok(ImplicitnessClass::General),
            "semi" | "semi-implicit" => Ok(ImplicitnessClass::SemiImplicit),
            "deterministic" | "det" => Ok(ImplicitnessClass::Deterministic),
            _ => Err(GrowthError::UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrowthError {
    #[error("tree {0} has stochastic nodes but the class is deterministic")]
    StochasticTree(String),
    #[error("order {0} is outside the domain (needs q >= 1/2, integer q >= 1 for deterministic)")]
    OrderDomain(Order),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("unknown name {0:?}")]
    UnknownName(String),
}

/// The growth function matching `it` and `cls`.
pub fn growth(tree: &Tree, it: IterationKind, cls: ImplicitnessClass) -> Result<u32, GrowthError> {
    if cls == ImplicitnessClass::Deterministic && !tree.is_deterministic() {
        return Err(GrowthError::StochasticTree(tree.to_string()));
    }
    Ok(growth_rec(tree, it, cls == ImplicitnessClass::SemiImplicit))
}

fn growth_rec(tree: &Tree, it: IterationKind, semi: bool) -> u32 {
    if semi && tree.color() > 0 {
        return 1;
    }
    let kids = tree.children();
    if kids.is_empty() {
        return 1;
    }
    let vals = kids.iter().map(|c| growth_rec(c, it, semi));
    match it {
        IterationKind::Simple => 1 + vals.max().unwrap_or(0),
        IterationKind::ModifiedNewton => {
            let m = vals.max().unwrap_or(0);
            if kids.len() == 1 {
                m
            } else {
                1 + m
            }
        }
        IterationKind::FullNewton => {
            let vals: Vec<u32> = vals.collect();
            let m = *vals.iter().max().unwrap_or(&0);
            let attaining = vals.iter().filter(|&&v| v == m).count();
            if attaining >= 2 {
                m + 1
            } else {
                m
            }
        }
    }
}

/// `𝔤'(u)`: the largest growth among the children of `u`.
pub fn weak_growth(u: &FTree, it: IterationKind, cls: ImplicitnessClass) -> Result<u32, GrowthError> {
    let mut m = 0;
    for c in u.children() {
        m = m.max(growth(c, it, cls)?);
    }
    Ok(m)
}

fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// `𝒢(q)`, the largest growth over trees of order at most `q`.
pub fn max_growth(q: Order, it: IterationKind, cls: ImplicitnessClass) -> Result<u32, GrowthError> {
    let n = u64::from(q.twice());
    match cls {
        ImplicitnessClass::General => {
            if n < 1 {
                return Err(GrowthError::OrderDomain(q));
            }
            Ok(match it {
                IterationKind::Simple => n as u32,
                IterationKind::ModifiedNewton => n.div_ceil(2) as u32,
                IterationKind::FullNewton => floor_log2(n + 1),
            })
        }
        ImplicitnessClass::SemiImplicit => {
            if n < 1 {
                return Err(GrowthError::OrderDomain(q));
            }
            Ok(match it {
                IterationKind::Simple => n.div_ceil(2) as u32,
                IterationKind::ModifiedNewton => n.div_ceil(3) as u32,
                IterationKind::FullNewton => {
                    // ⌊log₂((q+1)/3)⌋ + 2, at least 1
                    if n + 2 >= 6 {
                        floor_log2((n + 2) / 6) + 2
                    } else {
                        1
                    }
                }
            })
        }
        ImplicitnessClass::Deterministic => {
            if !q.is_integer() || n < 2 {
                return Err(GrowthError::OrderDomain(q));
            }
            let q = n / 2;
            Ok(match it {
                IterationKind::Simple => q as u32,
                IterationKind::ModifiedNewton => q.div_ceil(2) as u32,
                IterationKind::FullNewton => floor_log2(q + 1),
            })
        }
    }
}

/// Iterations from a predictor of growth `g0` needed for order `p`:
/// `max(0, 𝒢(arg) − g0)` with `arg = ⌊p+½⌋` when the increments have
/// vanishing odd moments and `arg = p+½` otherwise.
///
/// Deterministic problems only have integer orders, so there the argument is
/// rounded down to an integer in both cases.
pub fn iterations_needed(
    p: Order,
    it: IterationKind,
    cls: ImplicitnessClass,
    zero_odd_moments: bool,
    g0: u32,
) -> Result<u32, GrowthError> {
    if p.twice() < 1 {
        return Err(GrowthError::OrderDomain(p));
    }
    let shifted = p.plus_half();
    let mut arg = if zero_odd_moments {
        Order::from_int(shifted.floor())
    } else {
        shifted
    };
    if cls == ImplicitnessClass::Deterministic {
        arg = Order::from_int(arg.floor());
    }
    Ok(max_growth(arg, it, cls)?.saturating_sub(g0))
}

/// Smallest order of a tree with growth `k`.
pub fn minimal_order_for_growth(
    k: u32,
    it: IterationKind,
    cls: ImplicitnessClass,
) -> Result<Order, GrowthError> {
    if k < 1 {
        return Err(GrowthError::ZeroK);
    }
    let pow = |e: u32| 1u32 << e;
    // in units of 1/2
    let twice = match (cls, it) {
        (ImplicitnessClass::General, IterationKind::Simple) => k,
        (ImplicitnessClass::General, IterationKind::ModifiedNewton) => 2 * k - 1,
        (ImplicitnessClass::General, IterationKind::FullNewton) => pow(k) - 1,
        (ImplicitnessClass::SemiImplicit, IterationKind::Simple) => 2 * k - 1,
        (ImplicitnessClass::SemiImplicit, IterationKind::ModifiedNewton) => 3 * k - 2,
        (ImplicitnessClass::SemiImplicit, IterationKind::FullNewton) => {
            // (3/4)·2^k − 1 rounded up to a half-integer; exact for k ≥ 2
            if k == 1 {
                1
            } else {
                3 * pow(k - 1) - 2
            }
        }
        (ImplicitnessClass::Deterministic, IterationKind::Simple) => 2 * k,
        (ImplicitnessClass::Deterministic, IterationKind::ModifiedNewton) => 2 * (2 * k - 1),
        (ImplicitnessClass::Deterministic, IterationKind::FullNewton) => 2 * (pow(k) - 1),
    };
    Ok(Order::from_twice(twice))
}
