//! Sparse truncated power series in `z_1..z_n, zbar_1..zbar_n`.

use super::mono::{table, Mono, MonoTable};
use super::scalar::Coeff;
use crate::error::{precondition, structural, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// Truncated polynomial `sum c_{alpha,beta} z^alpha zbar^beta` of total degree at most `order`.
///
/// `effective_order` is the degree up to which coefficients are trusted: it
/// drops by one with each derivative and products take the minimum.
#[derive(Clone, PartialEq)]
pub struct Jet<C: Coeff = Complex64> {
    n: usize,
    order: u32,
    eff: i32,
    terms: BTreeMap<Mono, C>,
}

impl<C: Coeff> fmt::Debug for Jet<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(n={}, N={}, eff={}) {{", self.n, self.order, self.eff)?;
        for (m, c) in &self.terms {
            write!(f, " {:?}{:?}:{:?}", m.alpha_vec(self.n), m.beta_vec(self.n), c)?;
        }
        write!(f, " }}")
    }
}

pub(crate) struct DenseAcc<C: Coeff> {
    table: Arc<MonoTable>,
    vals: Vec<C>,
}

impl<C: Coeff> DenseAcc<C> {
    pub(crate) fn new(n: usize, order: u32) -> Self {
        let table = table(n, order);
        let vals = vec![C::zero(); table.len()];
        DenseAcc { table, vals }
    }

    #[inline]
    fn add(&mut self, m: Mono, c: C) {
        let i = self.table.idx(m);
        self.vals[i] += c;
    }

    fn into_terms(self) -> BTreeMap<Mono, C> {
        let table = self.table;
        self.vals
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_negligible())
            .map(|(i, c)| (table.monos[i], c))
            .collect()
    }
}

impl<C: Coeff> Jet<C> {
    pub fn zero(n: usize, order: u32) -> Self {
        assert!(n >= 1 && n <= super::mono::MAX_DIM, "dimension {n} unsupported");
        Jet { n, order, eff: order as i32, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, order: u32, c: C) -> Self {
        let mut j = Self::zero(n, order);
        j.add_term(Mono::ONE, c);
        j
    }

    pub fn one(n: usize, order: u32) -> Self {
        Self::constant(n, order, C::one())
    }

    /// The coordinate function of real variable `a` (`z_{a+1}` for `a < n`, else `zbar_{a-n+1}`).
    pub fn var(n: usize, order: u32, a: usize) -> Self {
        let mut j = Self::zero(n, order);
        if order >= 1 {
            j.add_term(Mono::var(n, a), C::one());
        }
        j
    }

    /// `z_k`, 0-based.
    pub fn z(n: usize, order: u32, k: usize) -> Self {
        Self::var(n, order, k)
    }

    /// `zbar_k`, 0-based.
    pub fn zbar(n: usize, order: u32, k: usize) -> Self {
        Self::var(n, order, n + k)
    }

    pub fn monomial(n: usize, order: u32, m: Mono, c: C) -> Self {
        let mut j = Self::zero(n, order);
        j.add_term(m, c);
        j
    }

    /// Sums the given terms, dropping those above `order`.
    pub fn from_terms(n: usize, order: u32, terms: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut j = Self::zero(n, order);
        for (m, c) in terms {
            j.add_term(m, c);
        }
        j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn effective_order(&self) -> i32 {
        self.eff
    }

    /// Lowers the trusted degree to at most `eff`.
    pub fn with_effective_order(mut self, eff: i32) -> Self {
        self.eff = self.eff.min(eff);
        self
    }

    /// Marks all coefficients up to `order` as trusted (for exact polynomials).
    pub fn exact(mut self) -> Self {
        self.eff = self.order as i32;
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Mono) -> C {
        self.terms.get(&m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(Mono::ONE)
    }

    /// Adds `c * m` in place; terms above the order are ignored.
    pub fn add_term(&mut self, m: Mono, c: C) {
        if m.degree() > self.order {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                *old += c;
                if old.is_negligible() {
                    self.terms.remove(&m);
                }
            }
            None => {
                if !c.is_negligible() {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    pub fn set_term(&mut self, m: Mono, c: C) {
        self.terms.remove(&m);
        self.add_term(m, c);
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n || self.order != o.order {
            return Err(structural(format!(
                "jet mismatch: (n={}, N={}) vs (n={}, N={})",
                self.n, self.order, o.n, o.order
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        out.eff = self.eff.min(o.eff);
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        out.eff = self.eff.min(o.eff);
        for (m, c) in &o.terms {
            out.add_term(*m, -c.clone());
        }
        Ok(out)
    }

    pub fn add_assign_ref(&mut self, o: &Self) {
        self.check(o).expect("jet add");
        self.eff = self.eff.min(o.eff);
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }

    /// `self += c * o`.
    pub fn add_scaled(&mut self, c: &C, o: &Self) {
        self.check(o).expect("jet add");
        self.eff = self.eff.min(o.eff);
        for (m, d) in &o.terms {
            self.add_term(*m, c.clone() * d.clone());
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_negligible() {
            return Self::zero(self.n, self.order).with_effective_order(self.eff);
        }
        let terms =
            self.terms.iter().map(|(m, d)| (*m, d.clone() * c.clone())).filter(|(_, d)| !d.is_negligible()).collect();
        Jet { n: self.n, order: self.order, eff: self.eff, terms }
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let eff = self.eff.min(o.eff);
        if self.terms.is_empty() || o.terms.is_empty() {
            return Ok(Self::zero(self.n, self.order).with_effective_order(eff));
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::ONE) {
                return Ok(o.scale(c).with_effective_order(eff));
            }
        }
        if o.terms.len() == 1 {
            if let Some(c) = o.terms.get(&Mono::ONE) {
                return Ok(self.scale(c).with_effective_order(eff));
            }
        }
        let t = table(self.n, self.order);
        let rhs: Vec<(usize, u32, &C)> = o.terms.iter().map(|(m, c)| (t.idx(*m), m.degree(), c)).collect();
        let mut acc = vec![C::zero(); t.len()];
        for (ma, ca) in &self.terms {
            let room = self.order - ma.degree();
            let ia = t.idx(*ma);
            for &(ib, db, cb) in &rhs {
                if db > room {
                    break;
                }
                acc[t.prod(ia, ib)] += ca.clone() * cb.clone();
            }
        }
        let terms =
            acc.into_iter().enumerate().filter(|(_, c)| !c.is_negligible()).map(|(i, c)| (t.monos[i], c)).collect();
        Ok(Jet { n: self.n, order: self.order, eff, terms })
    }

    /// `(alpha, beta, c) -> (beta, alpha, conj(c))`.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.conj(), c.conj())).collect();
        Jet { n: self.n, order: self.order, eff: self.eff, terms }
    }

    /// Partial derivative along real variable `a` (`d/dz_{a+1}` or `d/dzbar_{a-n+1}`).
    pub fn try_partial(&self, a: usize) -> Result<Self> {
        if a >= 2 * self.n {
            return Err(structural(format!("variable index {a} out of range for n = {}", self.n)));
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(self.n, a);
            if e > 0 {
                let d = c.clone() * C::from_i64(e as i64);
                if !d.is_negligible() {
                    terms.insert(m.lower(self.n, a).expect("positive exponent"), d);
                }
            }
        }
        Ok(Jet { n: self.n, order: self.order, eff: self.eff - 1, terms })
    }

    pub fn partial(&self, a: usize) -> Self {
        self.try_partial(a).expect("partial derivative")
    }

    /// `d/dz_k`, 0-based.
    pub fn dz(&self, k: usize) -> Self {
        self.partial(k)
    }

    /// `d/dzbar_k`, 0-based.
    pub fn dzbar(&self, k: usize) -> Self {
        self.partial(self.n + k)
    }

    /// Evaluates at `z` with `zbar = conj(z)`.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.n, "evaluation point dimension");
        let maxd = self.order as usize;
        let mut pz = vec![vec![Complex64::new(1.0, 0.0); maxd + 1]; self.n];
        let mut pb = pz.clone();
        for k in 0..self.n {
            for e in 1..=maxd {
                pz[k][e] = pz[k][e - 1] * z[k];
                pb[k][e] = pb[k][e - 1] * z[k].conj();
            }
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.to_c64();
            for k in 0..self.n {
                let (a, b) = (m.alpha(k) as usize, m.beta(k) as usize);
                if a > 0 {
                    v *= pz[k][a];
                }
                if b > 0 {
                    v *= pb[k][b];
                }
            }
            s += v;
        }
        s
    }

    /// Drops terms above degree `d`; the trusted degree becomes at most `d`.
    pub fn truncate(&self, d: i32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| (m.degree() as i32) <= d).map(|(m, c)| (*m, c.clone())).collect();
        Jet { n: self.n, order: self.order, eff: self.eff.min(d), terms }
    }

    /// The part of exact degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (*m, c.clone())).collect();
        Jet { n: self.n, order: self.order, eff: self.eff, terms }
    }

    /// Re-embeds with a different truncation order.
    pub fn with_order(&self, order: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() <= order).map(|(m, c)| (*m, c.clone())).collect();
        Jet { n: self.n, order, eff: self.eff.min(order as i32), terms }
    }

    /// Converts coefficients to another field.
    pub fn map_field<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Jet<D> {
        let terms = self.terms.iter().map(|(m, c)| (*m, f(c))).filter(|(_, c)| !c.is_negligible()).collect();
        Jet { n: self.n, order: self.order, eff: self.eff, terms }
    }

    /// Largest coefficient modulus, all degrees.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus among trusted degrees.
    pub fn residual(&self) -> f64 {
        self.terms.iter().filter(|(m, _)| (m.degree() as i32) <= self.eff).map(|(_, c)| c.modulus()).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - o` up to both trusted degrees.
    pub fn distance(&self, o: &Self) -> f64 {
        self.try_sub(o).expect("jet distance").residual()
    }

    /// Composition `f(phi(z))`; see [`Substitution`].
    pub fn compose(&self, phi: &[Jet<C>], affine: bool) -> Result<Self> {
        Substitution::new(phi.to_vec(), affine, self.order)?.apply(self)
    }

    /// Lowest degree carrying a nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }
}

impl Jet<Complex64> {
    pub fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl<C: Coeff> $tr<&Jet<C>> for &Jet<C> {
            type Output = Jet<C>;
            fn $method(self, rhs: &Jet<C>) -> Jet<C> {
                self.$inner(rhs).expect(concat!("jet ", stringify!($method)))
            }
        }
        impl<C: Coeff> $tr<Jet<C>> for Jet<C> {
            type Output = Jet<C>;
            fn $method(self, rhs: Jet<C>) -> Jet<C> {
                (&self).$inner(&rhs).expect(concat!("jet ", stringify!($method)))
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<C: Coeff> Neg for &Jet<C> {
    type Output = Jet<C>;
    fn neg(self) -> Jet<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> Neg for Jet<C> {
    type Output = Jet<C>;
    fn neg(self) -> Jet<C> {
        self.scale(&-C::one())
    }
}

/// A substitution `z_k -> phi_k`, `zbar_k -> conj(phi_k)` with cached monomial images.
///
/// Without the affine flag every `phi_k` must vanish at 0, so source terms of
/// degree above the target order contribute nothing.
pub struct Substitution<C: Coeff = Complex64> {
    n: usize,
    order: u32,
    eff: i32,
    source_degree: u32,
    affine: bool,
    images: Vec<Jet<C>>,
    source_table: Arc<MonoTable>,
}

impl<C: Coeff> Substitution<C> {
    /// `source_degree` bounds the degree of jets this will be applied to
    /// (only relevant with `affine`).
    pub fn new(phi: Vec<Jet<C>>, affine: bool, source_degree: u32) -> Result<Self> {
        let n = phi.len();
        if n == 0 {
            return Err(structural("empty substitution"));
        }
        let order = phi[0].order;
        for p in &phi {
            if p.n != n || p.order != order {
                return Err(structural("substitution jets disagree on (n, order)"));
            }
            if !affine && !p.constant_term().is_negligible() {
                return Err(precondition("substitution has a nonzero constant term; affine composition not requested"));
            }
        }
        let eff = phi.iter().map(|p| p.eff).min().unwrap_or(order as i32);
        let top = if affine { source_degree } else { source_degree.min(order) };
        let source_table = table(n, top);
        let mut full: Vec<Jet<C>> = phi.clone();
        full.extend(phi.iter().map(|p| p.conj()));
        let mut images: Vec<Jet<C>> = Vec::with_capacity(source_table.len());
        for m in &source_table.monos {
            if *m == Mono::ONE {
                images.push(Jet::one(n, order));
                continue;
            }
            let a = (0..2 * n).find(|&a| m.exp(n, a) > 0).expect("nonconstant monomial");
            let lower = m.lower(n, a).expect("positive exponent");
            let img = &images[source_table.idx(lower)] * &full[a];
            images.push(img);
        }
        Ok(Substitution { n, order, eff, source_degree: top, affine, images, source_table })
    }

    /// `f(phi(z))` truncated at the substitution's order.
    pub fn apply(&self, f: &Jet<C>) -> Result<Jet<C>> {
        if f.n != self.n {
            return Err(structural("composition dimension mismatch"));
        }
        let mut acc = DenseAcc::new(self.n, self.order);
        for (m, c) in &f.terms {
            if m.degree() > self.source_degree {
                if self.affine {
                    return Err(structural("affine composition source degree exceeds the prepared table"));
                }
                continue;
            }
            let img = &self.images[self.source_table.idx(*m)];
            for (mi, ci) in &img.terms {
                acc.add(*mi, c.clone() * ci.clone());
            }
        }
        Ok(Jet {
            n: self.n,
            order: self.order,
            eff: f.eff.min(self.eff).min(self.order as i32),
            terms: acc.into_terms(),
        })
    }
}
