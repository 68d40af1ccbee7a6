//! Stochastic Taylor schemes of the form
//! `Y₁ = B(Φex, Y₀) + B(Φim, Y₁)`.
//!
//! Each scheme carries its weights twice: as exact symbolic tables over the
//! step increments, and as hand-written numeric evaluators for the explicit
//! part, the implicit part and the Jacobian of the implicit part.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::algebra::{exact_method_weights, AlgebraError, Catalog, Increment, Poly, Sym, WeightMap};
use crate::growth::ImplicitnessClass;
use crate::linalg::{Matrix, Vector};
use crate::problems::{derivative, ProblemError, SdeProblem};
use crate::solvers::{solve_step, SolveConfig, SolveError};
use crate::tree::{Order, Tree};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("unknown scheme {0:?}")]
    Unknown(String),
    #[error("parameter {name} = {value} outside [0, 1]")]
    Parameter { name: &'static str, value: f64 },
    #[error("scheme {scheme} needs derivatives of order {needed}; {problem} provides {available}")]
    DerivativeOrder {
        scheme: String,
        problem: String,
        needed: usize,
        available: usize,
    },
    #[error("cutoff {cutoff} exceeds the symbolic table (order {table})")]
    Cutoff { cutoff: Order, table: Order },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// The random variables of one step of size `h`.
///
/// `i10 = ∫(W(s) − W(tₙ)) ds` and `i01 = h·ΔW − i10`; `i11` and `i111` are
/// the Itô double and triple integrals of `dW`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticIncrements {
    pub h: f64,
    pub dw: f64,
    pub i10: f64,
    pub i01: f64,
    pub i11: f64,
    pub i111: f64,
}

impl StochasticIncrements {
    pub fn new(h: f64, dw: f64, i10: f64) -> Self {
        StochasticIncrements {
            h,
            dw,
            i10,
            i01: h * dw - i10,
            i11: 0.5 * (dw * dw - h),
            i111: dw * (dw * dw - 3.0 * h) / 6.0,
        }
    }

    pub fn zero() -> Self {
        StochasticIncrements::new(0.0, 0.0, 0.0)
    }

    pub fn value(&self, i: Increment) -> f64 {
        match i {
            Increment::H => self.h,
            Increment::DW => self.dw,
            Increment::I11 => self.i11,
            Increment::I10 => self.i10,
            Increment::I01 => self.i01,
            Increment::I111 => self.i111,
        }
    }

    /// Evaluates a polynomial in the increment symbols.
    ///
    /// # Panics
    /// If the polynomial contains tree-indexed symbols.
    pub fn eval(&self, p: &Poly) -> f64 {
        p.eval(|s| match s {
            Sym::Inc(i) => Some(self.value(*i)),
            _ => None,
        })
        .expect("increment polynomial")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    /// θ-Euler–Maruyama: drift weighted `1 − θ` explicit, `θ` implicit.
    Euler { theta: f64 },
    /// Milstein family with drift-implicitness `alpha` and
    /// diffusion-implicitness `beta`.
    Milstein { alpha: f64, beta: f64 },
    /// Fully implicit Milstein–Taylor scheme.
    ImplicitMilstein,
    /// Semi-implicit strong order 1.5 Taylor scheme (Kloeden–Platen).
    Sikp,
    /// Semi-implicit weak order 2 Taylor scheme (Platen).
    Siw,
    /// Fully implicit strong order 1.5 Taylor scheme.
    Fit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Strong,
    Weak,
}

#[derive(Clone, Debug)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub name: String,
    pub order: Order,
    pub convergence: Convergence,
    pub implicitness: ImplicitnessClass,
    /// Odd moments of the increment products vanish, so the iteration count
    /// may use `⌊p + ½⌋`.
    pub zero_odd_moments: bool,
    /// Highest derivative of `g` used by the evaluators, Jacobian included.
    pub max_derivative_order: usize,
    pub symbolic_ex: WeightMap,
    pub symbolic_im: WeightMap,
}

/// Order up to which the symbolic tables are stated; every shipped scheme
/// has its support below it.
pub const TABLE_ORDER: Order = Order::from_twice(4);

fn inc(i: Increment) -> Poly {
    Poly::inc(i)
}

fn float(x: f64) -> Poly {
    Poly::constant(BigRational::from_float(x).expect("finite parameter"))
}

struct Table {
    ex: WeightMap,
    im: WeightMap,
}

impl Table {
    fn new() -> Self {
        Table {
            ex: WeightMap::unit(TABLE_ORDER, 2),
            im: WeightMap::zero(TABLE_ORDER, 2),
        }
    }

    fn ex(mut self, tree: &str, p: Poly) -> Self {
        self.ex.set(Tree::parse(tree).expect("tree literal"), p).expect("within table");
        self
    }

    fn im(mut self, tree: &str, p: Poly) -> Self {
        self.im.set(Tree::parse(tree).expect("tree literal"), p).expect("within table");
        self
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), SchemeError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SchemeError::Parameter { name, value })
    }
}

fn symbolic_table(kind: SchemeKind) -> Table {
    let h = inc(Increment::H);
    let w = inc(Increment::DW);
    let i11 = inc(Increment::I11);
    let i10 = inc(Increment::I10);
    let i01 = inc(Increment::I01);
    let i111 = inc(Increment::I111);
    let h2 = &h * &h;
    let hw = &h * &w;
    let r = Poly::ratio;
    match kind {
        SchemeKind::Euler { theta } => Table::new()
            .ex("•0", &h * &float(1.0 - theta))
            .im("•0", &h * &float(theta))
            .ex("•1", w),
        SchemeKind::Milstein { alpha, beta } => Table::new()
            .ex("•0", &h * &float(1.0 - alpha))
            .im("•0", &h * &float(alpha))
            .ex("•1", &w * &float(1.0 - beta))
            .im("•1", &w * &float(beta))
            .ex("[•1]1", &i11 - &(&(&w * &w) * &float(beta))),
        SchemeKind::ImplicitMilstein => Table::new()
            .im("•0", h.clone())
            .im("•1", w)
            .im("[•1]1", -&(&i11 + &h)),
        SchemeKind::Sikp => Table::new()
            .ex("•1", w)
            .ex("[•1]1", i11)
            .ex("[•1]0", -&i01)
            .ex("[•0]1", i01.clone())
            .ex("[•1,•1]1", &i01 + &i111.scale_int(2))
            .ex("[[•1]1]1", i111)
            .im("•0", h)
            .im("[•0]0", &h2 * &r(-1, 2))
            .im("[•1,•1]0", &h2 * &r(-1, 2)),
        SchemeKind::Siw => Table::new()
            .ex("•1", w)
            .ex("[•1]1", i11)
            .ex("[•1]0", &hw * &r(-1, 2))
            .ex("[•0]1", &hw * &r(1, 2))
            .ex("[•1,•1]1", &hw * &r(1, 2))
            .im("•0", h)
            .im("[•0]0", &h2 * &r(-1, 2))
            .im("[•1,•1]0", &h2 * &r(-1, 2)),
        SchemeKind::Fit => {
            let half = r(1, 2);
            let diff = &i01 - &i10;
            Table::new()
                .im("•1", &w * &half)
                .im("•0", &h * &half)
                .im("[•1]1", &(&i11 + &h) * &half)
                .im("[•0]0", &h2 * &r(1, 4))
                .im("[•1,•1]0", &h2 * &r(1, 4))
                .ex("•1", &w * &half)
                .ex("•0", &h * &half)
                .ex("[•1]1", -&(&h + &(&i11 * &half)))
                .ex("[•0]1", &diff * &half)
                .ex("[•1]0", &diff * &r(-1, 2))
                .ex("[•1,•1]1", &(&i01 - &(&hw * &r(7, 2))) - &i111.scale_int(4))
                .ex("[[•1]1]1", -&(&(&hw * &r(3, 2)) + &i111.scale_int(2)))
                .ex("[•0]0", &h2 * &r(-1, 4))
                .ex("[•0,•1]1", -&h2)
                .ex("[[•1]0]1", &h2 * &r(-1, 4))
                .ex("[[•0]1]1", &h2 * &r(-3, 4))
                .ex("[•1,•1]0", &h2 * &r(-1, 4))
                .ex("[[[•1]1]1]1", &h2 * &r(-1, 4))
                .ex("[[•1,•1]1]1", &h2 * &r(-5, 4))
                .ex("[[•1]1,•1]1", &h2 * &r(-7, 4))
                .ex("[•1,•1,•1]1", &h2 * &r(-9, 2))
        }
    }
}

/// Builds a scheme by kind.
pub fn make_scheme(kind: SchemeKind) -> Result<SchemeSpec, SchemeError> {
    use ImplicitnessClass::{General, SemiImplicit};
    let (name, order, convergence, implicitness, max_derivative_order) = match kind {
        SchemeKind::Euler { theta } => {
            check_unit("theta", theta)?;
            let name = match theta {
                t if t == 0.0 => "euler-explicit".to_string(),
                t if t == 1.0 => "euler-semi".to_string(),
                t => format!("euler({t})"),
            };
            (name, Order::HALF, Convergence::Strong, SemiImplicit, 1)
        }
        SchemeKind::Milstein { alpha, beta } => {
            check_unit("alpha", alpha)?;
            check_unit("beta", beta)?;
            let cls = if beta == 0.0 { SemiImplicit } else { General };
            (format!("milstein({alpha},{beta})"), Order::from_int(1), Convergence::Strong, cls, 1)
        }
        SchemeKind::ImplicitMilstein => ("im".into(), Order::from_int(1), Convergence::Strong, General, 2),
        SchemeKind::Sikp => ("sikp".into(), Order::from_twice(3), Convergence::Strong, SemiImplicit, 3),
        SchemeKind::Siw => ("siw".into(), Order::from_int(2), Convergence::Weak, SemiImplicit, 3),
        SchemeKind::Fit => ("fit".into(), Order::from_twice(3), Convergence::Strong, General, 3),
    };
    let table = symbolic_table(kind);
    Ok(SchemeSpec {
        kind,
        name,
        order,
        convergence,
        implicitness,
        zero_odd_moments: true,
        max_derivative_order,
        symbolic_ex: table.ex,
        symbolic_im: table.im,
    })
}

/// Parses a scheme name: `euler-explicit`, `euler-semi`, `euler(θ)`,
/// `milstein(α,β)`, `sim`, `im`, `sikp`, `siw`, `fit`.
pub fn scheme_by_name(name: &str) -> Result<SchemeSpec, SchemeError> {
    let unknown = || SchemeError::Unknown(name.to_string());
    let params = |rest: &str| -> Result<Vec<f64>, SchemeError> {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(unknown)?;
        inner
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| unknown()))
            .collect()
    };
    let kind = match name.trim() {
        "euler-explicit" => SchemeKind::Euler { theta: 0.0 },
        "euler-semi" => SchemeKind::Euler { theta: 1.0 },
        "sim" => SchemeKind::Milstein { alpha: 1.0, beta: 0.0 },
        "milstein" => SchemeKind::Milstein { alpha: 0.0, beta: 0.0 },
        "im" => SchemeKind::ImplicitMilstein,
        "sikp" => SchemeKind::Sikp,
        "siw" => SchemeKind::Siw,
        "fit" => SchemeKind::Fit,
        other => {
            if let Some(rest) = other.strip_prefix("milstein") {
                match params(rest)?.as_slice() {
                    [a, b] => SchemeKind::Milstein { alpha: *a, beta: *b },
                    _ => return Err(unknown()),
                }
            } else if let Some(rest) = other.strip_prefix("euler") {
                match params(rest)?.as_slice() {
                    [t] => SchemeKind::Euler { theta: *t },
                    _ => return Err(unknown()),
                }
            } else {
                return Err(unknown());
            }
        }
    };
    make_scheme(kind)
}

impl FromStr for SchemeSpec {
    type Err = SchemeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        scheme_by_name(s)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Derivatives of `g₀`, `g₁` at one point, named after the products the
/// schemes use.
struct At<'a, P: ?Sized> {
    p: &'a P,
    y: Vector,
    g0: Vector,
    g1: Vector,
}

impl<'a, P: SdeProblem + ?Sized> At<'a, P> {
    fn new(p: &'a P, y: Vector) -> Self {
        At {
            p,
            y,
            g0: p.g(0, y),
            g1: p.g(1, y),
        }
    }
    fn d(&self, l: usize, u: Vector) -> Vector {
        self.p.dg(l, self.y, u)
    }
    fn d2(&self, l: usize, u: Vector, v: Vector) -> Vector {
        self.p.d2g(l, self.y, u, v)
    }
    fn d3(&self, l: usize, u: Vector, v: Vector, w: Vector) -> Vector {
        self.p.d3g(l, self.y, u, v, w)
    }
}

impl SchemeSpec {
    pub fn is_explicit(&self) -> bool {
        self.symbolic_im.support().is_empty()
    }

    pub fn check_problem<P: SdeProblem + ?Sized>(&self, p: &P) -> Result<(), SchemeError> {
        if p.max_derivative_order() < self.max_derivative_order {
            return Err(SchemeError::DerivativeOrder {
                scheme: self.name.clone(),
                problem: p.name().to_string(),
                needed: self.max_derivative_order,
                available: p.max_derivative_order(),
            });
        }
        Ok(())
    }

    /// `B(Φex, y)`, including `y` itself.
    pub fn eval_explicit_part<P: SdeProblem + ?Sized>(
        &self,
        p: &P,
        y: Vector,
        inc: &StochasticIncrements,
    ) -> Vector {
        let StochasticIncrements {
            h,
            dw,
            i10,
            i01,
            i11,
            i111,
        } = *inc;
        let a = At::new(p, y);
        let (g0, g1) = (a.g0, a.g1);
        match self.kind {
            SchemeKind::Euler { theta } => y.axpy(h * (1.0 - theta), g0).axpy(dw, g1),
            SchemeKind::Milstein { alpha, beta } => y
                .axpy(h * (1.0 - alpha), g0)
                .axpy(dw * (1.0 - beta), g1)
                .axpy(i11 - beta * dw * dw, a.d(1, g1)),
            SchemeKind::ImplicitMilstein => y,
            SchemeKind::Sikp => {
                let g11 = a.d(1, g1);
                let g1_11 = a.d2(1, g1, g1);
                y.axpy(dw, g1)
                    .axpy(i11, g11)
                    .axpy(-i01, a.d(0, g1))
                    .axpy(i01, a.d(1, g0).axpy(0.5, g1_11))
                    .axpy(i111, a.d(1, g11) + g1_11)
            }
            SchemeKind::Siw => {
                let bracket = a.d(1, g0) - a.d(0, g1) + 0.5 * a.d2(1, g1, g1);
                y.axpy(dw, g1).axpy(i11, a.d(1, g1)).axpy(0.5 * dw * h, bracket)
            }
            SchemeKind::Fit => {
                let h2 = h * h;
                let hw = h * dw;
                let g11 = a.d(1, g1);
                let g111 = a.d(1, g11);
                let g1_11 = a.d2(1, g1, g1);
                let g10 = a.d(1, g0);
                y.axpy(0.5 * dw, g1)
                    .axpy(0.5 * h, g0)
                    .axpy(-(h + 0.5 * i11), g11)
                    .axpy(0.5 * (i01 - i10), g10)
                    .axpy(-0.5 * (i01 - i10), a.d(0, g1))
                    .axpy(0.5 * i01 - 1.75 * hw - 2.0 * i111, g1_11)
                    .axpy(-(1.5 * hw + 2.0 * i111), g111)
                    .axpy(-0.25 * h2, a.d(0, g0))
                    .axpy(-h2, a.d2(1, g0, g1))
                    .axpy(-0.25 * h2, a.d(1, a.d(0, g1)))
                    .axpy(-0.75 * h2, a.d(1, g10))
                    .axpy(-0.125 * h2, a.d2(0, g1, g1))
                    .axpy(-0.25 * h2, a.d(1, g111))
                    .axpy(-0.625 * h2, a.d(1, g1_11))
                    .axpy(-1.75 * h2, a.d2(1, g11, g1))
                    .axpy(-0.75 * h2, a.d3(1, g1, g1, g1))
            }
        }
    }

    /// `B(Φim, y)`.
    pub fn eval_implicit_part<P: SdeProblem + ?Sized>(
        &self,
        p: &P,
        y: Vector,
        inc: &StochasticIncrements,
    ) -> Vector {
        let StochasticIncrements { h, dw, i11, .. } = *inc;
        let zero = Vector::zeros(y.len());
        match self.kind {
            SchemeKind::Euler { theta } => (h * theta) * p.g(0, y),
            SchemeKind::Milstein { alpha, beta } => {
                (h * alpha) * p.g(0, y) + (dw * beta) * p.g(1, y)
            }
            SchemeKind::ImplicitMilstein => {
                let a = At::new(p, y);
                zero.axpy(h, a.g0)
                    .axpy(dw, a.g1)
                    .axpy(-(i11 + h), a.d(1, a.g1))
            }
            SchemeKind::Sikp | SchemeKind::Siw => {
                let a = At::new(p, y);
                let bracket = a.d(0, a.g0) + 0.5 * a.d2(0, a.g1, a.g1);
                zero.axpy(h, a.g0).axpy(-0.5 * h * h, bracket)
            }
            SchemeKind::Fit => {
                let a = At::new(p, y);
                zero.axpy(0.5 * dw, a.g1)
                    .axpy(0.5 * h, a.g0)
                    .axpy(0.5 * (i11 + h), a.d(1, a.g1))
                    .axpy(0.25 * h * h, a.d(0, a.g0))
                    .axpy(0.125 * h * h, a.d2(0, a.g1, a.g1))
            }
        }
    }

    /// Jacobian of [`SchemeSpec::eval_implicit_part`] with respect to `y`.
    pub fn implicit_jacobian<P: SdeProblem + ?Sized>(
        &self,
        p: &P,
        y: Vector,
        inc: &StochasticIncrements,
    ) -> Matrix {
        let StochasticIncrements { h, dw, i11, .. } = *inc;
        let d = y.len();
        match self.kind {
            SchemeKind::Euler { theta } => {
                Matrix::from_columns(d, |v| (h * theta) * p.dg(0, y, v))
            }
            SchemeKind::Milstein { alpha, beta } => Matrix::from_columns(d, |v| {
                (h * alpha) * p.dg(0, y, v) + (dw * beta) * p.dg(1, y, v)
            }),
            SchemeKind::ImplicitMilstein => {
                let a = At::new(p, y);
                Matrix::from_columns(d, |v| {
                    // d(g₁'g₁)·v = g₁''(v, g₁) + g₁'g₁'v
                    let dg11 = a.d2(1, v, a.g1) + a.d(1, a.d(1, v));
                    Vector::zeros(d)
                        .axpy(h, a.d(0, v))
                        .axpy(dw, a.d(1, v))
                        .axpy(-(i11 + h), dg11)
                })
            }
            SchemeKind::Sikp | SchemeKind::Siw => {
                let a = At::new(p, y);
                Matrix::from_columns(d, |v| {
                    let dg00 = a.d2(0, v, a.g0) + a.d(0, a.d(0, v));
                    let dg0_11 = a.d3(0, v, a.g1, a.g1) + 2.0 * a.d2(0, a.d(1, v), a.g1);
                    Vector::zeros(d)
                        .axpy(h, a.d(0, v))
                        .axpy(-0.5 * h * h, dg00.axpy(0.5, dg0_11))
                })
            }
            SchemeKind::Fit => {
                let a = At::new(p, y);
                Matrix::from_columns(d, |v| {
                    let dg11 = a.d2(1, v, a.g1) + a.d(1, a.d(1, v));
                    let dg00 = a.d2(0, v, a.g0) + a.d(0, a.d(0, v));
                    let dg0_11 = a.d3(0, v, a.g1, a.g1) + 2.0 * a.d2(0, a.d(1, v), a.g1);
                    Vector::zeros(d)
                        .axpy(0.5 * dw, a.d(1, v))
                        .axpy(0.5 * h, a.d(0, v))
                        .axpy(0.5 * (i11 + h), dg11)
                        .axpy(0.25 * h * h, dg00)
                        .axpy(0.125 * h * h, dg0_11)
                })
            }
        }
    }
}

/// `F(τ)(x)`: the elementary differential of a nonempty tree.
pub fn elementary_differential<P: SdeProblem + ?Sized>(
    p: &P,
    tree: &Tree,
    x: Vector,
) -> Result<Vector, SchemeError> {
    let dirs = tree
        .children()
        .iter()
        .map(|c| elementary_differential(p, c, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(derivative(p, usize::from(tree.color()), x, &dirs)?)
}

/// `Σ α(τ)·φ(τ)·F(τ)(x)` over the trees of `catalog`, plus `φ(∅)·x`, with
/// increment symbols bound to `inc`.
pub fn bseries_sum<P: SdeProblem + ?Sized>(
    p: &P,
    weights: &WeightMap,
    catalog: &Catalog,
    x: Vector,
    inc: &StochasticIncrements,
) -> Result<Vector, SchemeError> {
    let mut acc = inc.eval(weights.at_empty()) * x;
    for tree in catalog.trees() {
        let w = weights.get(tree)?;
        if w.is_zero() {
            continue;
        }
        let coeff = tree.alpha().to_f64().expect("finite") * inc.eval(w);
        acc = acc.axpy(coeff, elementary_differential(p, tree, x)?);
    }
    Ok(acc)
}

/// Distance between the converged one-step solution and the truncated
/// B-series of the exact method weights with trees up to `cutoff`.
pub fn one_step_bseries_check<P: SdeProblem + ?Sized>(
    scheme: &SchemeSpec,
    p: &P,
    x: Vector,
    inc: &StochasticIncrements,
    cutoff: Order,
) -> Result<f64, SchemeError> {
    if cutoff > TABLE_ORDER {
        return Err(SchemeError::Cutoff {
            cutoff,
            table: TABLE_ORDER,
        });
    }
    let catalog = Catalog::new(cutoff, 2);
    let phi = exact_method_weights(&scheme.symbolic_ex, &scheme.symbolic_im, &catalog)?;
    let series = bseries_sum(p, &phi, &catalog, x, inc)?;
    let cfg = SolveConfig::converge(crate::growth::IterationKind::FullNewton, 1e-15, 100);
    let y = solve_step(scheme, p, x, inc, &cfg)?;
    Ok((y - series).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Gbm;

    #[test]
    fn increment_identities() {
        let inc = StochasticIncrements::new(0.25, 0.3, 0.01);
        assert!((inc.i01 + inc.i10 - inc.h * inc.dw).abs() < 1e-15);
        let root_h = StochasticIncrements::new(0.25, 0.5, 0.0);
        assert_eq!(root_h.i11, 0.0);
    }

    #[test]
    fn names_parse() {
        assert_eq!(scheme_by_name("sim").unwrap().kind, SchemeKind::Milstein { alpha: 1.0, beta: 0.0 });
        assert_eq!(
            scheme_by_name("milstein(0.5, 1)").unwrap().kind,
            SchemeKind::Milstein { alpha: 0.5, beta: 1.0 }
        );
        assert_eq!(scheme_by_name("euler(0.5)").unwrap().kind, SchemeKind::Euler { theta: 0.5 });
        assert!(scheme_by_name("milstein(2,0)").is_err());
        assert!(scheme_by_name("rk4").is_err());
        assert!(scheme_by_name("milstein(1)").is_err());
    }

    #[test]
    fn explicit_milstein_has_no_implicit_weights() {
        let s = make_scheme(SchemeKind::Milstein { alpha: 0.0, beta: 0.0 }).unwrap();
        assert!(s.is_explicit());
        let p = Gbm::new(-1.0, 0.5);
        let j = s.implicit_jacobian(&p, Vector::scalar(2.0), &StochasticIncrements::new(0.1, 0.3, 0.0));
        assert_eq!(j.max_abs(), 0.0);
    }

    #[test]
    fn elementary_differential_on_gbm() {
        let p = Gbm::new(-1.0, 0.5);
        let x = Vector::scalar(3.0);
        let f = elementary_differential(&p, &Tree::parse("[•1]1").unwrap(), x).unwrap();
        assert!((f[0] - 0.25 * 3.0).abs() < 1e-15);
        let deep = Tree::parse("[•1,•1,•1,•1]0").unwrap();
        assert!(elementary_differential(&p, &deep, x).is_err());
    }
}
