//! Differential forms with jet coefficients, in the frame `zeta*, zetabar*`
//! or in the coordinate basis `dz, dzbar`, and the operators
//! `d = del + delbar - theta - thetabar`.

mod identities;
mod matrix;

pub use identities::{fundamental_identities_check, random_test_function, IdentityRow};
pub use matrix::FormMatrix;

use crate::error::{structural, Result};
use crate::jet::{Jet, JetMatrix};
use crate::structure::{AlmostComplexStructure, BracketCoefficients, Frame};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

/// Which coframe the generators refer to. Frame bases carry a fingerprint of
/// the structure so forms from different structures are not mixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Frame(u64),
    Coordinate,
}

/// A form `sum_G u_G e*_G`; generators `0..n` are `zeta*_k` (or `dz_k`) and
/// `n..2n` are `zetabar*_k` (or `dzbar_k`); `G` is a bitmask, wedged in
/// increasing generator order.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    n: usize,
    order: u32,
    basis: Basis,
    terms: BTreeMap<u16, Jet>,
}

fn bits(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |b| mask & (1 << b) != 0)
}

/// Sign of `e*_a ^ e*_b` relative to the sorted product, or `None` if they overlap.
fn wedge_sign(a: u16, b: u16) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    for i in bits(a) {
        swaps += (b & ((1u16 << i) - 1)).count_ones();
    }
    Some(swaps % 2 == 1)
}

impl Form {
    pub fn zero(n: usize, order: u32, basis: Basis) -> Self {
        Form { n, order, basis, terms: BTreeMap::new() }
    }

    pub fn function(f: Jet, basis: Basis) -> Self {
        let mut u = Self::zero(f.n(), f.order(), basis);
        u.terms.insert(0, f);
        u
    }

    /// `f e*_{g_1} ^ ... ^ e*_{g_k}` for an arbitrary index list; sorts with
    /// sign tracking and returns zero on repeated indices.
    pub fn monomial(gens: &[usize], f: Jet, basis: Basis) -> Result<Self> {
        let n = f.n();
        let mut u = Self::zero(n, f.order(), basis);
        let mut mask = 0u16;
        let mut negative = false;
        for &g in gens {
            if g >= 2 * n {
                return Err(structural(format!("generator {g} out of range for n = {n}")));
            }
            match wedge_sign(mask, 1 << g) {
                None => return Ok(u),
                Some(s) => negative ^= s,
            }
            mask |= 1 << g;
        }
        u.terms.insert(mask, if negative { -f } else { f });
        Ok(u)
    }

    /// `f zeta*_K ^ zetabar*_L` with 0-based `K`, `L`.
    pub fn pq(k: &[usize], l: &[usize], f: Jet, basis: Basis) -> Result<Self> {
        let n = f.n();
        let gens: Vec<usize> = k.iter().copied().chain(l.iter().map(|x| x + n)).collect();
        Self::monomial(&gens, f, basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u16, &Jet)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mask: u16) -> Option<&Jet> {
        self.terms.get(&mask)
    }

    pub fn mask_bidegree(&self, mask: u16) -> (u32, u32) {
        let low = (1u16 << self.n) - 1;
        ((mask & low).count_ones(), (mask >> self.n).count_ones())
    }

    /// The common bidegree of all terms, if any.
    pub fn bidegree(&self) -> Option<(u32, u32)> {
        let mut it = self.terms.keys().map(|m| self.mask_bidegree(*m));
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    /// The `(p, q)` component.
    pub fn component(&self, p: u32, q: u32) -> Form {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| self.mask_bidegree(**m) == (p, q))
            .map(|(m, f)| (*m, f.clone()))
            .collect();
        Form { n: self.n, order: self.order, basis: self.basis, terms }
    }

    fn check(&self, o: &Form) -> Result<()> {
        if self.basis != o.basis || self.n != o.n || self.order != o.order {
            return Err(structural("forms refer to different bases or jet spaces"));
        }
        Ok(())
    }

    pub(crate) fn add_term(&mut self, mask: u16, f: Jet) {
        match self.terms.get_mut(&mask) {
            Some(e) => e.add_assign_ref(&f),
            None => {
                self.terms.insert(mask, f);
            }
        }
    }

    pub fn try_add(&self, o: &Form) -> Result<Form> {
        self.check(o)?;
        let mut out = self.clone();
        for (m, f) in &o.terms {
            out.add_term(*m, f.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, o: &Form) -> Result<Form> {
        self.try_add(&o.neg())
    }

    pub fn neg(&self) -> Form {
        self.map(|f| -f)
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Form {
        Form {
            n: self.n,
            order: self.order,
            basis: self.basis,
            terms: self.terms.iter().map(|(m, j)| (*m, f(j))).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Form {
        self.map(|f| f.scale(&c))
    }

    pub fn scale_jet(&self, g: &Jet) -> Form {
        self.map(|f| f * g)
    }

    pub fn wedge(&self, o: &Form) -> Result<Form> {
        self.check(o)?;
        let mut out = Form::zero(self.n, self.order, self.basis);
        for (ma, fa) in &self.terms {
            for (mb, fb) in &o.terms {
                if let Some(neg) = wedge_sign(*ma, *mb) {
                    let p = fa * fb;
                    out.add_term(ma | mb, if neg { -p } else { p });
                }
            }
        }
        Ok(out)
    }

    /// Complex conjugate: `conj(e*_g) = e*_{g +- n}`, re-sorted.
    pub fn conj(&self) -> Form {
        let n = self.n;
        let mut out = Form::zero(n, self.order, self.basis);
        for (m, f) in &self.terms {
            let gens: Vec<usize> = bits(*m).map(|g| (g + n) % (2 * n)).collect();
            let mono = Form::monomial(&gens, f.conj(), self.basis).expect("generators in range");
            for (mm, ff) in mono.terms {
                out.add_term(mm, ff);
            }
        }
        out
    }

    /// Adds `f e*_{g_1} ^ ... ^ e*_{g_k}`, sorting with sign.
    fn add_monomial(&mut self, gens: &[usize], f: Jet) {
        let mut mask = 0u16;
        let mut negative = false;
        for &g in gens {
            match wedge_sign(mask, 1 << g) {
                None => return,
                Some(s) => negative ^= s,
            }
            mask |= 1 << g;
        }
        self.add_term(mask, if negative { -f } else { f });
    }

    /// Value on the generator tuple `(e_{g_1}, ..., e_{g_k})`, i.e. the
    /// coefficient of the sorted mask with the sign of the sorting permutation.
    pub fn value_on(&self, gens: &[usize]) -> Jet {
        let mut probe = Form::zero(self.n, self.order, self.basis);
        probe.add_monomial(gens, Jet::one(self.n, self.order));
        match probe.terms.into_iter().next() {
            None => Jet::zero(self.n, self.order),
            Some((mask, sign)) => match self.terms.get(&mask) {
                Some(f) => f * &sign,
                None => Jet::zero(self.n, self.order),
            },
        }
    }

    /// Evaluation of a 2-form on two vectors given by their components on the generators' duals.
    pub fn pair2(&self, x: &[Complex64], y: &[Complex64], z: &[Complex64]) -> Complex64 {
        self.pair2_jet(x, y).eval(z)
    }

    /// The function `self(x, y)` for constant component vectors `x`, `y`.
    pub fn pair2_jet(&self, x: &[Complex64], y: &[Complex64]) -> Jet {
        let mut acc = Jet::zero(self.n, self.order);
        for (m, f) in &self.terms {
            let g: Vec<usize> = bits(*m).collect();
            if g.len() != 2 {
                continue;
            }
            acc = &acc + &f.scale(&(x[g[0]] * y[g[1]] - x[g[1]] * y[g[0]]));
        }
        acc
    }

    /// Pullback of a coordinate form along `z = psi(Z)`: coefficients through
    /// `sub`, and `dx_a = sum_b jac[a][b] dX_b`.
    pub fn pullback(&self, sub: &crate::jet::Substitution, jac: &JetMatrix) -> Result<Form> {
        if self.basis != Basis::Coordinate {
            return Err(structural("pullback acts on coordinate-basis forms"));
        }
        let (n, order) = (self.n, self.order);
        let images: Vec<Form> = (0..2 * n)
            .map(|a| {
                let mut f = Form::zero(n, order, Basis::Coordinate);
                for b in 0..2 * n {
                    let c = jac.get(a, b);
                    if !c.is_zero() {
                        f.add_term(1 << b, c.clone());
                    }
                }
                f
            })
            .collect();
        let mut out = Form::zero(n, order, Basis::Coordinate);
        for (mask, f) in &self.terms {
            let mut acc = Form::function(sub.apply(f)?, Basis::Coordinate);
            for g in bits(*mask) {
                acc = acc.wedge(&images[g])?;
            }
            out = out.try_add(&acc)?;
        }
        Ok(out)
    }

    /// Largest trusted coefficient modulus.
    pub fn residual(&self) -> f64 {
        self.terms.values().map(|f| f.residual()).fold(0.0, f64::max)
    }

    pub fn distance(&self, o: &Form) -> f64 {
        self.try_sub(o).expect("form distance").residual()
    }

    /// Smallest trusted degree among the coefficients.
    pub fn effective_order(&self) -> i32 {
        self.terms.values().map(|f| f.effective_order()).min().unwrap_or(self.order as i32)
    }

    /// Drops identically zero coefficients.
    pub fn pruned(mut self) -> Form {
        self.terms.retain(|_, f| !f.is_zero());
        self
    }

    /// Exterior derivative in the coordinate basis:
    /// `d(f dx_G) = sum_a d_a f dx_a ^ dx_G`.
    pub fn d_coordinate(&self) -> Result<Form> {
        if self.basis != Basis::Coordinate {
            return Err(structural("coordinate exterior derivative needs a coordinate-basis form"));
        }
        let mut out = Form::zero(self.n, self.order, self.basis);
        for (m, f) in &self.terms {
            for a in 0..2 * self.n {
                if let Some(neg) = wedge_sign(1 << a, *m) {
                    let df = f.partial(a);
                    out.add_term((1 << a) | m, if neg { -df } else { df });
                }
            }
        }
        Ok(out)
    }
}

/// Operators of the decomposition of `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Del,
    Delbar,
    Theta,
    Thetabar,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Del, Op::Delbar, Op::Theta, Op::Thetabar];

    fn index(self) -> usize {
        self as usize
    }

    /// Bidegree shift `(dp, dq)`.
    pub fn shift(self) -> (i32, i32) {
        match self {
            Op::Del => (1, 0),
            Op::Delbar => (0, 1),
            Op::Theta => (2, -1),
            Op::Thetabar => (-1, 2),
        }
    }
}

/// A structure with its frame, bracket coefficients and the images of the
/// coframe generators under the four operators.
#[derive(Clone, Debug)]
pub struct Geometry {
    structure: AlmostComplexStructure,
    frame: Frame,
    bc: BracketCoefficients,
    tag: u64,
    images: Vec<Vec<Form>>,
}

fn fingerprint(s: &AlmostComplexStructure) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    s.n().hash(&mut h);
    s.order().hash(&mut h);
    for m in [s.a(), s.b()] {
        for e in m.entries() {
            for (mono, c) in e.terms() {
                mono.hash(&mut h);
                c.re.to_bits().hash(&mut h);
                c.im.to_bits().hash(&mut h);
            }
        }
    }
    h.finish()
}

impl Geometry {
    pub fn new(s: &AlmostComplexStructure) -> Result<Self> {
        let frame = Frame::new(s)?;
        let bc = BracketCoefficients::new(&frame);
        let tag = fingerprint(s);
        let basis = Basis::Frame(tag);
        let n = s.n();
        let order = s.order();
        let eff = bc.m.first().map_or(order as i32, |x| x[0][0].effective_order());
        let blank = || Form::zero(n, order, basis);
        let two = |g1: usize, g2: usize, c: Jet| Form::monomial(&[g1, g2], c, basis).expect("generators in range");
        let mut images = vec![vec![blank(); 2 * n]; 4];
        for k in 0..n {
            let (mut del_z, mut del_zb, mut db_z, mut db_zb, mut th_zb, mut thb_z) =
                (blank(), blank(), blank(), blank(), blank(), blank());
            for l in 0..n {
                for t in 0..n {
                    // del zetabar*_k = sum conj(U)^k_{t,l} zeta*_l ^ zetabar*_t
                    del_zb = del_zb.try_add(&two(l, n + t, bc.ubar[k][t][l].clone())).unwrap();
                    // delbar zeta*_k = -sum U^k_{l,t} zeta*_l ^ zetabar*_t
                    db_z = db_z.try_add(&two(l, n + t, -&bc.u[k][l][t])).unwrap();
                    if l < t {
                        del_z = del_z.try_add(&two(l, t, -&bc.mbar[k][l][t])).unwrap();
                        db_zb = db_zb.try_add(&two(n + l, n + t, -&bc.m[k][l][t])).unwrap();
                        th_zb = th_zb.try_add(&two(l, t, bc.nbar[k][l][t].clone())).unwrap();
                        thb_z = thb_z.try_add(&two(n + l, n + t, bc.nn[k][l][t].clone())).unwrap();
                    }
                }
            }
            images[Op::Del.index()][k] = del_z;
            images[Op::Del.index()][n + k] = del_zb;
            images[Op::Delbar.index()][k] = db_z;
            images[Op::Delbar.index()][n + k] = db_zb;
            images[Op::Theta.index()][n + k] = th_zb;
            images[Op::Thetabar.index()][k] = thb_z;
        }
        for op in &mut images {
            for f in op.iter_mut() {
                *f = f.map(|j| j.clone().with_effective_order(eff));
            }
        }
        Ok(Geometry { structure: s.clone(), frame, bc, tag, images })
    }

    pub fn structure(&self) -> &AlmostComplexStructure {
        &self.structure
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn brackets(&self) -> &BracketCoefficients {
        &self.bc
    }

    pub fn n(&self) -> usize {
        self.structure.n()
    }

    pub fn order(&self) -> u32 {
        self.structure.order()
    }

    pub fn basis(&self) -> Basis {
        Basis::Frame(self.tag)
    }

    fn check(&self, u: &Form) -> Result<()> {
        if u.basis != self.basis() || u.n != self.n() || u.order != self.order() {
            return Err(structural("form is not expressed in this structure's frame"));
        }
        Ok(())
    }

    pub fn function(&self, f: Jet) -> Form {
        Form::function(f, self.basis())
    }

    /// Frame generator `zeta*_g` (`g < n`) or `zetabar*_{g-n}`.
    pub fn generator(&self, g: usize) -> Form {
        Form::monomial(&[g], Jet::one(self.n(), self.order()), self.basis()).expect("generator in range")
    }

    /// Image of a generator under `op`.
    pub fn generator_image(&self, op: Op, g: usize) -> &Form {
        &self.images[op.index()][g]
    }

    /// Leibniz expansion over the coframe:
    /// `T(f e*_G) = T f ^ e*_G + f sum_j (-1)^{j-1} T e*_{g_j} ^ e*_{G minus g_j}`.
    pub fn apply_leibniz(&self, op: Op, u: &Form) -> Result<Form> {
        self.check(u)?;
        let n = self.n();
        let mut out = Form::zero(n, self.order(), self.basis());
        for (mask, f) in &u.terms {
            let dir = match op {
                Op::Del => Some(0..n),
                Op::Delbar => Some(n..2 * n),
                _ => None,
            };
            if let Some(range) = dir {
                for g in range {
                    if let Some(neg) = wedge_sign(1 << g, *mask) {
                        let df = self.frame.derive(g, f);
                        out.add_term((1 << g) | mask, if neg { -df } else { df });
                    }
                }
            }
            for (pos, g) in bits(*mask).enumerate() {
                let rest = mask & !(1 << g);
                for (m2, c) in &self.images[op.index()][g].terms {
                    if let Some(neg) = wedge_sign(*m2, rest) {
                        let p = c * f;
                        out.add_term(m2 | rest, if neg ^ (pos % 2 == 1) { -p } else { p });
                    }
                }
            }
        }
        Ok(out)
    }

    /// The displayed local expressions with their explicit signs, term by term:
    /// `(-1)^j` on removed `zeta*_{k_j}`, `-(-1)^p (-1)^j` on removed
    /// `zetabar*_{l_j}` for `del` and `theta`, `+(-1)^p (-1)^j` for `delbar`,
    /// `-(-1)^j` on removed `zeta*_{k_j}` for `thetabar` (`j` 1-based).
    pub fn apply(&self, op: Op, u: &Form) -> Result<Form> {
        self.check(u)?;
        let n = self.n();
        let bc = &self.bc;
        let mut out = Form::zero(n, self.order(), self.basis());
        let push = |out: &mut Form, gens: &[usize], c: Jet| out.add_monomial(gens, c);
        for (mask, f) in &u.terms {
            let kk: Vec<usize> = bits(*mask).filter(|&g| g < n).collect();
            let ll: Vec<usize> = bits(*mask).filter(|&g| g >= n).map(|g| g - n).collect();
            let p = kk.len();
            let sgn = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
            let lbar = |l: &[usize]| l.iter().map(|x| x + n).collect::<Vec<_>>();
            let without = |v: &[usize], j: usize| {
                v.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| *x).collect::<Vec<_>>()
            };
            match op {
                Op::Del | Op::Delbar => {
                    for r in 0..n {
                        let g = if op == Op::Del { r } else { n + r };
                        let mut gens = vec![g];
                        gens.extend(&kk);
                        gens.extend(lbar(&ll));
                        push(&mut out, &gens, self.frame.derive(g, f));
                    }
                }
                _ => {}
            }
            for (j0, &kj) in kk.iter().enumerate() {
                let s = sgn(j0 + 1);
                let khat = without(&kk, j0);
                for r in 0..n {
                    for t in 0..n {
                        let (gens, c) = match op {
                            Op::Del if r < t => (vec![r, t], bc.mbar[kj][r][t].scale(&Complex64::new(s, 0.0))),
                            Op::Delbar => (vec![r, n + t], bc.u[kj][r][t].scale(&Complex64::new(s, 0.0))),
                            Op::Thetabar if r < t => {
                                (vec![n + r, n + t], bc.nn[kj][r][t].scale(&Complex64::new(-s, 0.0)))
                            }
                            _ => continue,
                        };
                        let mut all = gens;
                        all.extend(&khat);
                        all.extend(lbar(&ll));
                        push(&mut out, &all, &c * f);
                    }
                }
            }
            for (j0, &lj) in ll.iter().enumerate() {
                let s = sgn(p) * sgn(j0 + 1);
                let lhat = without(&ll, j0);
                for r in 0..n {
                    for t in 0..n {
                        let (gens, c) = match op {
                            Op::Del => (vec![r, n + t], bc.ubar[lj][t][r].scale(&Complex64::new(-s, 0.0))),
                            Op::Delbar if r < t => (vec![n + r, n + t], bc.m[lj][r][t].scale(&Complex64::new(s, 0.0))),
                            Op::Theta if r < t => (vec![r, t], bc.nbar[lj][r][t].scale(&Complex64::new(-s, 0.0))),
                            _ => continue,
                        };
                        let mut all = gens;
                        all.extend(&kk);
                        all.extend(lbar(&lhat));
                        push(&mut out, &all, &c * f);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `del + delbar - theta - thetabar`.
    pub fn d(&self, u: &Form) -> Result<Form> {
        let a = self.apply(Op::Del, u)?.try_add(&self.apply(Op::Delbar, u)?)?;
        let b = self.apply(Op::Theta, u)?.try_add(&self.apply(Op::Thetabar, u)?)?;
        a.try_sub(&b)
    }

    /// `(-1)^p delbar` on `(p, 0)`-forms: the canonical `(0,1)`-connection on `Lambda^{p,0}`.
    pub fn canonical_delbar(&self, u: &Form) -> Result<Form> {
        match u.bidegree() {
            Some((p, 0)) => {
                let v = self.apply(Op::Delbar, u)?;
                Ok(if p % 2 == 1 { v.neg() } else { v })
            }
            None if u.terms.is_empty() => Ok(u.clone()),
            _ => Err(structural("canonical (0,1)-connection acts on (p,0)-forms")),
        }
    }

    fn convert(&self, u: &Form, onto: Basis, one_forms: &JetMatrix) -> Form {
        let n = self.n();
        let order = self.order();
        let gen = |g: usize| {
            let mut f = Form::zero(n, order, onto);
            for a in 0..2 * n {
                let c = one_forms.get(g, a);
                if !c.is_zero() {
                    f.add_term(1 << a, c.clone());
                }
            }
            f
        };
        let mut out = Form::zero(n, order, onto);
        for (mask, f) in &u.terms {
            let mut acc = Form::function(f.clone(), onto);
            for g in bits(*mask) {
                acc = acc.wedge(&gen(g)).expect("same basis");
            }
            out = out.try_add(&acc).expect("same basis");
        }
        out
    }

    /// Frame form to the coordinate basis (`zeta*_g = sum_a F^{-1}_{g,a} dx_a`).
    pub fn to_coordinate(&self, u: &Form) -> Result<Form> {
        self.check(u)?;
        Ok(self.convert(u, Basis::Coordinate, self.frame.dual()))
    }

    /// Coordinate form to the frame (`dx_a = sum_g F_{a,g} e*_g`).
    pub fn to_frame(&self, u: &Form) -> Result<Form> {
        if u.basis != Basis::Coordinate {
            return Err(structural("expected a coordinate-basis form"));
        }
        Ok(self.convert(u, self.basis(), self.frame.matrix()))
    }

    /// Compares the coordinate exterior derivative with the four-operator sum.
    pub fn exterior_derivative_check(&self, u: &Form) -> Result<f64> {
        let direct = self.to_coordinate(u)?.d_coordinate()?;
        let via = self.to_coordinate(&self.d(u)?)?;
        Ok(direct.distance(&via))
    }

    /// Largest coefficient of `theta` on the coframe generators.
    pub fn theta_magnitude(&self) -> f64 {
        (0..2 * self.n()).map(|g| self.images[Op::Theta.index()][g].residual()).fold(0.0, f64::max)
    }
}
