//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! All weight maps share one variable universe: tree-indexed indeterminates
//! (`Φ_ex(τ)`, `Φ_im(τ)`, `Φ_0(τ)`) and the step increments of a scheme
//! (`h`, `ΔW`, `I₍₁,₁₎`, ...). Symbols are interned process-wide into dense
//! ids; a monomial is the sorted multiset of its symbol ids.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{LazyLock, PoisonError, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::tree::Tree;

/// Random variables of one step, as symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Increment {
    H,
    DW,
    I11,
    I10,
    I01,
    I111,
}

impl Increment {
    pub const ALL: [Increment; 6] = [
        Increment::H,
        Increment::DW,
        Increment::I11,
        Increment::I10,
        Increment::I01,
        Increment::I111,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Increment::H => "h",
            Increment::DW => "ΔW",
            Increment::I11 => "I11",
            Increment::I10 => "I10",
            Increment::I01 => "I01",
            Increment::I111 => "I111",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    /// Free weight `Φ_ex(τ)`.
    Ex(Tree),
    /// Free weight `Φ_im(τ)`.
    Im(Tree),
    /// Free predictor weight `Φ_0(τ)`.
    Pred(Tree),
    Inc(Increment),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Ex(t) => write!(f, "ex({t})"),
            Sym::Im(t) => write!(f, "im({t})"),
            Sym::Pred(t) => write!(f, "pred({t})"),
            Sym::Inc(i) => write!(f, "{}", i.name()),
        }
    }
}

#[derive(Default)]
struct Interner {
    ids: FxHashMap<Sym, u32>,
    syms: Vec<Sym>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| RwLock::new(Interner::default()));

fn intern(sym: &Sym) -> u32 {
    if let Some(&id) = INTERNER.read().unwrap_or_else(PoisonError::into_inner).ids.get(sym) {
        return id;
    }
    let mut w = INTERNER.write().unwrap_or_else(PoisonError::into_inner);
    if let Some(&id) = w.ids.get(sym) {
        return id;
    }
    let id = w.syms.len() as u32;
    w.syms.push(sym.clone());
    w.ids.insert(sym.clone(), id);
    id
}

fn resolve(id: u32) -> Sym {
    INTERNER.read().unwrap_or_else(PoisonError::into_inner).syms[id as usize].clone()
}

type Monomial = SmallVec<[u32; 6]>;

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Monomial::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Exact sparse polynomial over ℚ.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Poly {
    terms: FxHashMap<Monomial, BigRational>,
}

static ZERO: LazyLock<Poly> = LazyLock::new(Poly::zero);

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    /// Shared zero, for lookups that fall back to it.
    pub fn zero_ref() -> &'static Poly {
        &ZERO
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Poly::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(sym: Sym) -> Self {
        let mut p = Poly::zero();
        let mut m = Monomial::new();
        m.push(intern(&sym));
        p.terms.insert(m, BigRational::one());
        p
    }

    pub fn inc(i: Increment) -> Self {
        Poly::var(Sym::Inc(i))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self
                .terms
                .get(&Monomial::new())
                .cloned(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn scale_int(&self, c: u64) -> Poly {
        self.scale(&BigRational::from_integer(BigInt::from(c)))
    }

    /// `self += coeff · a · b`.
    pub fn add_product(&mut self, coeff: &BigRational, a: &Poly, b: &Poly) {
        if coeff.is_zero() {
            return;
        }
        for (ma, ca) in &a.terms {
            let cac = ca * coeff;
            for (mb, cb) in &b.terms {
                self.add_term(mul_monomials(ma, mb), &cac * cb);
            }
        }
    }

    /// `coeff · ∏ factors`; the empty product is `coeff`.
    pub fn product(coeff: u64, factors: &[&Poly]) -> Poly {
        let mut acc = Poly::constant(BigRational::from_integer(BigInt::from(coeff)));
        for f in factors {
            if acc.is_zero() {
                break;
            }
            acc = &acc * *f;
        }
        acc
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates with every symbol bound to a float.
    pub fn eval<F>(&self, mut bind: F) -> Option<f64>
    where
        F: FnMut(&Sym) -> Option<f64>,
    {
        let mut cache: FxHashMap<u32, f64> = FxHashMap::default();
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = c.to_f64()?;
            for id in m {
                let x = match cache.get(id) {
                    Some(&x) => x,
                    None => {
                        let x = bind(&resolve(*id))?;
                        cache.insert(*id, x);
                        x
                    }
                };
                v *= x;
            }
            total += v;
        }
        Some(total)
    }

    /// Substitutes each symbol through `bind`; unbound symbols stay free.
    pub fn substitute<F>(&self, mut bind: F) -> Poly
    where
        F: FnMut(&Sym) -> Option<Poly>,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for id in m {
                match bind(&resolve(*id)) {
                    Some(p) => term = &term * &p,
                    None => {
                        let mut mono = Monomial::new();
                        mono.push(*id);
                        let single = Poly {
                            terms: std::iter::once((mono, BigRational::one())).collect(),
                        };
                        term = &term * &single;
                    }
                }
            }
            out += &term;
        }
        out
    }

    /// Symbols occurring in the polynomial.
    pub fn symbols(&self) -> Vec<Sym> {
        let mut ids: Vec<u32> = self.terms.keys().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        let mut syms: Vec<Sym> = ids.into_iter().map(resolve).collect();
        syms.sort();
        syms
    }

    /// Terms as (coefficient, symbols-with-multiplicity), in a stable order.
    pub fn terms(&self) -> Vec<(BigRational, Vec<Sym>)> {
        let mut out: Vec<(BigRational, Vec<Sym>)> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut syms: Vec<Sym> = m.iter().map(|&id| resolve(id)).collect();
                syms.sort();
                (c.clone(), syms)
            })
            .collect();
        out.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.1.cmp(&b.1)));
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, syms)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if syms.is_empty() || !abs.is_one() {
                write!(f, "{abs}")?;
                if !syms.is_empty() {
                    write!(f, "·")?;
                }
            }
            let names: Vec<String> = syms.iter().map(Sym::to_string).collect();
            write!(f, "{}", names.join("·"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        out.add_product(&BigRational::one(), self, rhs);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::inc(Increment::DW)
    }
    fn h() -> Poly {
        Poly::inc(Increment::H)
    }

    #[test]
    fn ring_identities() {
        let a = &x() + &Poly::from_int(2);
        let b = &h() - &x();
        assert_eq!(&a * &b, &b * &a);
        assert_eq!(&(&a + &b) * &a, &(&a * &a) + &(&b * &a));
        assert!((&a - &a).is_zero());
        assert_eq!(&a * &Poly::one(), a);
        assert!((&a * &Poly::zero()).is_zero());
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &(&x() * &h()) - &(&h() * &x());
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn evaluation_binds_symbols() {
        // (ΔW² − h)/2 at ΔW = 3, h = 1
        let i11 = (&x().pow(2) - &h()).scale(&BigRational::new(1.into(), 2.into()));
        let v = i11
            .eval(|s| match s {
                Sym::Inc(Increment::DW) => Some(3.0),
                Sym::Inc(Increment::H) => Some(1.0),
                _ => None,
            })
            .unwrap();
        assert_eq!(v, 4.0);
        assert!(i11.eval(|_| None).is_none());
    }

    #[test]
    fn substitution_keeps_unbound_symbols() {
        let p = &x() * &h();
        let q = p.substitute(|s| match s {
            Sym::Inc(Increment::DW) => Some(Poly::from_int(2)),
            _ => None,
        });
        assert_eq!(q, h().scale_int(2));
    }

    #[test]
    fn constants() {
        assert!(Poly::one().is_one());
        assert_eq!(Poly::zero().as_constant(), Some(BigRational::zero()));
        assert_eq!(x().as_constant(), None);
        assert_eq!(Poly::ratio(1, 2).to_string(), "1/2");
    }
}
