//! `A` from `B`: the closed decomposition sum and a degree-by-degree solver
//! of `A^2 = -I - conj(B) B`.

use crate::jet::{Coeff, DMat, JetMatrix, Mono};
use std::collections::{BTreeMap, HashMap};

/// Matrix coefficients `X^{alpha,beta}` keyed by `z^alpha zbar^beta`.
pub type Family<C> = BTreeMap<Mono, DMat<C>>;

/// Nonzero coefficient matrices of a jet matrix, up to its trusted degree.
pub fn coefficient_family<C: Coeff>(m: &JetMatrix<C>) -> Family<C> {
    let eff = m.effective_order();
    let mut fam: Family<C> = BTreeMap::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            for (mono, v) in m.get(r, c).terms() {
                if mono.degree() as i32 > eff {
                    continue;
                }
                fam.entry(*mono).or_insert_with(|| DMat::zeros(m.rows(), m.cols()))[(r, c)] = v.clone();
            }
        }
    }
    fam
}

/// `sum X^{alpha,beta} z^alpha zbar^beta` as a jet matrix.
pub fn family_to_matrix<C: Coeff>(fam: &Family<C>, size: usize, n: usize, order: u32) -> JetMatrix<C> {
    let mut m = JetMatrix::zeros(size, size, n, order);
    for (mono, x) in fam {
        for r in 0..size {
            for c in 0..size {
                if !x[(r, c)].is_negligible() {
                    m.get_mut(r, c).add_term(*mono, x[(r, c)].clone());
                }
            }
        }
    }
    m.map(|e| e.clone().exact())
}

/// All monomials dividing `m`, including `1` and `m`.
fn sub_monomials(m: Mono, n: usize) -> Vec<Mono> {
    let mut out = vec![Mono::ONE];
    for a in 0..2 * n {
        let e = m.exp(n, a);
        let unit = Mono::var(n, a);
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for d in &out {
            let mut p = *d;
            next.push(p);
            for _ in 0..e {
                p = p.mul(unit);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Recursive enumeration of the ordered decompositions, memoized on
/// (remaining multi-index pair, slots left).
struct Enumerator<'a, C: Coeff> {
    n: usize,
    b: &'a Family<C>,
    single: HashMap<Mono, Option<DMat<C>>>,
    chains: HashMap<(Mono, u32), Option<DMat<C>>>,
}

impl<'a, C: Coeff> Enumerator<'a, C> {
    /// `sum_{rho+mu=alpha, lambda+gamma=beta} conj(B^{lambda,mu}) B^{rho,gamma}`,
    /// with `B^{0,beta} = 0`.
    fn single(&mut self, m: Mono) -> Option<DMat<C>> {
        if let Some(v) = self.single.get(&m) {
            return v.clone();
        }
        let mut acc: Option<DMat<C>> = None;
        for (key, b) in self.b {
            if key.alpha_degree() == 0 || !m.is_divisible_by(*key) {
                continue;
            }
            // rest carries (mu, lambda) as (alpha, beta); B^{lambda,mu} is keyed by its conjugate
            let rest = m.div(*key).conj();
            if rest.alpha_degree() == 0 {
                continue;
            }
            if let Some(bl) = self.b.get(&rest) {
                let p = bl.conj().mul(b);
                acc = Some(match acc {
                    Some(a) => a.add(&p),
                    None => p,
                });
            }
        }
        self.single.insert(m, acc.clone());
        acc
    }

    /// Sum over ordered `k`-tuples of the products of `single` terms.
    fn chain(&mut self, m: Mono, k: u32) -> Option<DMat<C>> {
        if k == 1 {
            return self.single(m);
        }
        if let Some(v) = self.chains.get(&(m, k)) {
            return v.clone();
        }
        let mut acc: Option<DMat<C>> = None;
        for d in sub_monomials(m, self.n) {
            // each slot needs |lambda|, |rho| >= 1, hence degree >= 2
            if d.degree() < 2 || m.div(d).degree() < 2 * (k - 1) {
                continue;
            }
            let Some(head) = self.single(d) else { continue };
            let Some(tail) = self.chain(m.div(d), k - 1) else { continue };
            let p = head.mul(&tail);
            acc = Some(match acc {
                Some(a) => a.add(&p),
                None => p,
            });
        }
        self.chains.insert((m, k), acc.clone());
        acc
    }
}

/// The closed decomposition formula for `A^{alpha,beta}` (with `m = z^alpha zbar^beta`):
/// `sum_{k=1}^{[|alpha+beta|/2]} (-4)^{-(k-1)} sum prod_r conj(B^{lambda_r,mu_r}) B^{rho_r,gamma_r}`.
pub fn a_from_b_closed_form<C: Coeff>(b: &Family<C>, n: usize, m: Mono) -> DMat<C> {
    let mut e = Enumerator { n, b, single: HashMap::new(), chains: HashMap::new() };
    closed_form_with(&mut e, m)
}

fn closed_form_with<C: Coeff>(e: &mut Enumerator<'_, C>, m: Mono) -> DMat<C> {
    let size = e.b.values().next().map_or(e.n, |x| x.rows());
    let mut out = DMat::zeros(size, size);
    if m.alpha_degree() == 0 || m.beta_degree() == 0 {
        return out;
    }
    let mut weight = C::one();
    let quarter = C::from_ratio(-1, 4);
    for k in 1..=m.degree() / 2 {
        if let Some(t) = e.chain(m, k) {
            out = out.add(&t.scale(&weight));
        }
        weight = weight * quarter.clone();
    }
    out
}

/// `A^{alpha,beta}` from the closed formula for every `|alpha|, |beta| >= 1`
/// up to `order`.
pub fn a_family_closed_form<C: Coeff>(b: &Family<C>, n: usize, order: u32) -> Family<C> {
    let mut e = Enumerator { n, b, single: HashMap::new(), chains: HashMap::new() };
    let mut out = BTreeMap::new();
    for m in Mono::all(n, order) {
        if m.alpha_degree() == 0 || m.beta_degree() == 0 {
            continue;
        }
        let a = closed_form_with(&mut e, m);
        if a.max_abs() > 0.0 {
            out.insert(m, a);
        }
    }
    out
}

/// `A = iI + (i/2) sum A^{alpha,beta} z^alpha zbar^beta`.
pub fn a_matrix_from_family<C: Coeff>(fam: &Family<C>, n: usize, order: u32) -> JetMatrix<C> {
    let half_i = C::i() * C::from_ratio(1, 2);
    let y = family_to_matrix(fam, n, n, order).scale(&half_i);
    JetMatrix::identity(n, n, order).scale(&C::i()).add(&y)
}

/// Inverse of [`a_matrix_from_family`]: `A^{alpha,beta} = -2i (A - iI)^{alpha,beta}`.
pub fn a_family_from_matrix<C: Coeff>(a: &JetMatrix<C>) -> Family<C> {
    let n = a.rows();
    let y = a.sub(&JetMatrix::identity(n, n, a.order()).scale(&C::i()));
    let factor = -(C::i() * C::from_i64(2));
    coefficient_family(&y).into_iter().map(|(m, x)| (m, x.scale(&factor))).collect()
}

/// Solves `A^2 = -I - conj(B) B` with `A(0) = iI` degree by degree:
/// `A = iI + Y`, `Y = (i/2)(conj(B) B + Y^2)`.
pub fn a_from_b_series<C: Coeff>(b: &JetMatrix<C>) -> JetMatrix<C> {
    let n = b.rows();
    let order = b.order();
    let x = b.conj().mul(b);
    let half_i = C::i() * C::from_ratio(1, 2);
    let mut y = JetMatrix::zeros(n, n, n, order);
    // Y has valuation >= 2, so each pass fixes two more degrees.
    for _ in 0..=order / 2 {
        y = x.add(&y.mul(&y)).scale(&half_i);
    }
    JetMatrix::identity(n, n, order).scale(&C::i()).add(&y).with_effective_order(b.effective_order())
}

/// `A` for a given `B`: the closed formula, which is exact for total
/// degree at most 5, and the degree-by-degree solve above that.
pub fn a_for_b(b: &JetMatrix) -> JetMatrix {
    let n = b.rows();
    let order = b.order();
    if order <= 5 {
        let fam = coefficient_family(b);
        let a = a_matrix_from_family(&a_family_closed_form(&fam, n, order), n, order);
        a.with_effective_order(b.effective_order())
    } else {
        a_from_b_series(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{exact, exact_is_zero, ExactComplex, Jet};
    use num_complex::Complex64;

    fn fixb_exact(order: u32) -> JetMatrix<ExactComplex> {
        let n = 2;
        let mut b = JetMatrix::zeros(n, n, n, order);
        b.set(0, 0, Jet::monomial(n, order, Mono::new(&[0, 1], &[0, 0]), exact(3, 10, 1, 10)).exact());
        b
    }

    #[test]
    fn sub_monomials_count() {
        let m = Mono::new(&[2, 1], &[0, 1]);
        assert_eq!(sub_monomials(m, 2).len(), 3 * 2 * 2);
    }

    #[test]
    fn fixb_quadratic_coefficient() {
        let b = fixb_exact(4);
        let fam = a_family_closed_form(&coefficient_family(&b), 2, 4);
        let a = a_matrix_from_family(&fam, 2, 4);
        // (i/2)|b|^2 z2 zbar2 with |b|^2 = 1/10
        let c = a.get(0, 0).coeff(Mono::new(&[0, 1], &[0, 1]));
        assert_eq!(c, exact(0, 1, 1, 20));
    }

    #[test]
    fn lowest_order_term_is_single_product() {
        // |alpha + beta| = 2: A^{e_s, e_r} = conj(B^{e_r}) B^{e_s}
        let n = 2;
        let order = 3;
        let mut b = JetMatrix::<ExactComplex>::zeros(n, n, n, order);
        b.set(0, 1, Jet::monomial(n, order, Mono::new(&[1, 0], &[0, 0]), exact(1, 3, -1, 5)));
        b.set(1, 0, Jet::monomial(n, order, Mono::new(&[0, 1], &[0, 0]), exact(2, 7, 0, 1)));
        b.set(1, 1, Jet::monomial(n, order, Mono::new(&[0, 1], &[0, 0]), exact(0, 1, 1, 2)));
        let fam = coefficient_family(&b);
        let (e1, e2) = (Mono::new(&[1, 0], &[0, 0]), Mono::new(&[0, 1], &[0, 0]));
        for (s, r) in [(e1, e1), (e1, e2), (e2, e1), (e2, e2)] {
            let got = a_from_b_closed_form(&fam, n, s.mul(r.conj()));
            let zero = DMat::zeros(n, n);
            let bs = fam.get(&s).cloned().unwrap_or(zero.clone());
            let br = fam.get(&r).cloned().unwrap_or(zero);
            assert_eq!(got, br.conj().mul(&bs));
        }
    }

    fn exact_matrix_eq(a: &JetMatrix<ExactComplex>, b: &JetMatrix<ExactComplex>, upto: u32) -> bool {
        let d = a.sub(b);
        let same = d.entries().all(|e| e.terms().all(|(m, c)| m.degree() > upto || exact_is_zero(c)));
        same
    }

    #[test]
    fn closed_form_equals_solver_exactly_to_degree_five() {
        let n = 2;
        let order = 5;
        // a normal-form B with several degree 1..3 terms
        let mut b = JetMatrix::<ExactComplex>::zeros(n, n, n, order);
        let t = |a: [u32; 2], bb: [u32; 2], c| Jet::monomial(n, order, Mono::new(&a, &bb), c);
        b.set(0, 0, &t([0, 1], [0, 0], exact(1, 2, 1, 3)) + &t([0, 1], [1, 0], exact(-1, 4, 0, 1)));
        b.set(1, 0, &t([0, 1], [0, 0], exact(0, 1, 2, 5)) + &t([1, 1], [0, 0], exact(1, 7, 1, 7)));
        b.set(0, 1, t([0, 2], [0, 1], exact(3, 8, -1, 2)));
        let fam = coefficient_family(&b);
        let closed = a_matrix_from_family(&a_family_closed_form(&fam, n, order), n, order);
        let solved = a_from_b_series(&b.map(|e| e.clone().exact()));
        assert!(exact_matrix_eq(&closed, &solved, 5));
    }

    #[test]
    fn closed_form_weight_differs_from_solver_at_degree_six() {
        // three-fold products first appear at total degree 6; the square-root
        // series weights them by 1/8 where the closed formula uses 1/16
        let n = 2;
        let order = 6;
        let mut b = JetMatrix::<ExactComplex>::zeros(n, n, n, order);
        b.set(0, 0, Jet::monomial(n, order, Mono::new(&[0, 1], &[0, 0]), exact(1, 1, 0, 1)));
        let fam = coefficient_family(&b);
        let m = Mono::new(&[0, 3], &[0, 3]);
        let closed = a_from_b_closed_form(&fam, n, m);
        let solved = a_family_from_matrix(&a_from_b_series(&b.map(|e| e.clone().exact())));
        assert_eq!(closed[(0, 0)], exact(1, 16, 0, 1));
        assert_eq!(solved[&m][(0, 0)], exact(1, 8, 0, 1));
    }

    #[test]
    fn float_a_satisfies_constraints() {
        let n = 2;
        let order = 4;
        let mut b = JetMatrix::zeros(n, n, n, order);
        b.set(0, 0, Jet::monomial(n, order, Mono::new(&[0, 1], &[0, 0]), Complex64::new(0.3, 0.1)).exact());
        let a = a_for_b(&b);
        let s = crate::structure::AlmostComplexStructure::new(a, b).unwrap();
        assert!(s.validate().residual() < 1e-14);
    }
}
