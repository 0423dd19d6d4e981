//! Coordinate changes `Z = Phi(z)` fixing the origin, and their action on `J`.

use super::AlmostComplexStructure;
use crate::error::{precondition, structural, Result};
use crate::jet::{DMat, Jet, JetMatrix, Mono, Substitution};
use num_complex::Complex64;

/// Forward jets `Z_k(z)` are kept one degree above the structure order so
/// that the Jacobian is exact to that order; the inverse `z_k(Z)` is kept at
/// the structure order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChange {
    order: u32,
    forward: Vec<Jet>,
    inverse: Vec<Jet>,
}

impl CoordinateChange {
    pub fn identity(n: usize, order: u32) -> Self {
        CoordinateChange {
            order,
            forward: (0..n).map(|k| Jet::z(n, order + 1, k).exact()).collect(),
            inverse: (0..n).map(|k| Jet::z(n, order, k).exact()).collect(),
        }
    }

    /// `forward` at order `order + 1`, vanishing at the origin.
    pub fn new(forward: Vec<Jet>, order: u32) -> Result<Self> {
        let n = forward.len();
        if n == 0 || forward.iter().any(|f| f.n() != n || f.order() != order + 1) {
            return Err(structural("forward jets must be n jets in n variables at order N + 1"));
        }
        if forward.iter().any(|f| f.constant_term().norm() > 0.0) {
            return Err(precondition("coordinate change must fix the origin"));
        }
        let inverse = series_inverse(&forward, order)?;
        Ok(CoordinateChange { order, forward, inverse })
    }

    /// `Z = L z + K zbar`.
    pub fn linear(l: &DMat, k: &DMat, order: u32) -> Result<Self> {
        let n = l.rows();
        let forward = (0..n)
            .map(|r| {
                let mut f = Jet::zero(n, order + 1);
                for c in 0..n {
                    f.add_term(Mono::var(n, c), l[(r, c)]);
                    f.add_term(Mono::var(n, n + c), k[(r, c)]);
                }
                f.exact()
            })
            .collect();
        Self::new(forward, order)
    }

    pub fn n(&self) -> usize {
        self.forward.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn forward(&self) -> &[Jet] {
        &self.forward
    }

    pub fn inverse(&self) -> &[Jet] {
        &self.inverse
    }

    /// `next . self`.
    pub fn then(&self, next: &CoordinateChange) -> Result<Self> {
        if next.n() != self.n() || next.order != self.order {
            return Err(structural("composed coordinate changes disagree on (n, order)"));
        }
        let fwd = Substitution::new(self.forward.clone(), false, self.order + 1)?;
        let forward = next.forward.iter().map(|f| fwd.apply(f)).collect::<Result<Vec<_>>>()?;
        let inv = Substitution::new(next.inverse.clone(), false, self.order)?;
        let inverse = self.inverse.iter().map(|f| inv.apply(f)).collect::<Result<Vec<_>>>()?;
        Ok(CoordinateChange { order: self.order, forward, inverse })
    }

    /// Largest coefficient of `Phi - id` up to the structure order.
    pub fn deviation_from_identity(&self) -> f64 {
        let n = self.n();
        self.forward.iter().enumerate().map(|(k, f)| f.distance(&Jet::z(n, self.order + 1, k))).fold(0.0, f64::max)
    }

    /// Constant Jacobian `[[dZ/dz, dZ/dzbar], [conj, conj]]`.
    pub fn linear_part(&self) -> DMat {
        jacobian_constant(&self.forward)
    }

    /// Jacobian `dPhi` at the structure order, in the source variables `z`.
    pub fn jacobian(&self) -> JetMatrix {
        let n = self.n();
        let mut full: Vec<Jet> = self.forward.clone();
        full.extend(self.forward.iter().map(|f| f.conj()));
        JetMatrix::from_fn(2 * n, 2 * n, |r, a| full[r].partial(a).with_order(self.order))
    }
}

fn jacobian_constant(forward: &[Jet]) -> DMat {
    let n = forward.len();
    DMat::from_fn(2 * n, 2 * n, |r, a| {
        let (f, conj) = if r < n { (&forward[r], false) } else { (&forward[r - n], true) };
        // d(conj f)/d var_a = conj(d f / d var_{a'}) with a' the conjugate slot
        let (m, take_conj) = if conj { (Mono::var(n, (a + n) % (2 * n)), true) } else { (Mono::var(n, a), false) };
        let c = f.coeff(m);
        if take_conj {
            c.conj()
        } else {
            c
        }
    })
}

/// Series inverse by fixed-point iteration with the constant Jacobian:
/// `w = D0^{-1} ([Z; Zbar] - [h(w); conj h(w)])`, one degree per step.
fn series_inverse(forward: &[Jet], order: u32) -> Result<Vec<Jet>> {
    let n = forward.len();
    let d0 = jacobian_constant(forward);
    let r = d0.inverse().map_err(|e| precondition(format!("Jacobian at the origin is singular: {e}")))?;
    let g: Vec<Jet> = forward.iter().map(|f| f.with_order(order)).collect();
    let h: Vec<Jet> = g
        .iter()
        .map(|f| {
            Jet::from_terms(n, order, f.terms().filter(|(m, _)| m.degree() >= 2).map(|(m, c)| (*m, *c)))
                .with_effective_order(f.effective_order())
        })
        .collect();
    let vars: Vec<Jet> = (0..2 * n).map(|a| Jet::var(n, order, a).exact()).collect();
    let combine = |rhs: &[Jet]| -> Vec<Jet> {
        (0..n)
            .map(|k| {
                let mut s = Jet::zero(n, order);
                for (a, x) in rhs.iter().enumerate() {
                    s.add_scaled(&r[(k, a)], x);
                }
                s
            })
            .collect()
    };
    let mut w = combine(&vars);
    if h.iter().all(|x| x.is_zero()) {
        return Ok(w.into_iter().map(|x| x.with_effective_order(order as i32)).collect());
    }
    for _ in 1..order {
        let sub = Substitution::new(w.clone(), false, order)?;
        let hw: Vec<Jet> = h.iter().map(|x| sub.apply(x)).collect::<Result<_>>()?;
        let mut rhs = Vec::with_capacity(2 * n);
        for k in 0..n {
            rhs.push(&vars[k] - &hw[k]);
        }
        for k in 0..n {
            rhs.push(&vars[n + k] - &hw[k].conj());
        }
        w = combine(&rhs);
    }
    Ok(w)
}

/// Structure in the new coordinates: `M'(Z) = dPhi(z(Z)) M(z(Z)) dPhi(z(Z))^{-1}`.
pub fn transform_structure(s: &AlmostComplexStructure, phi: &CoordinateChange) -> Result<AlmostComplexStructure> {
    if phi.n() != s.n() || phi.order() != s.order() {
        return Err(structural("coordinate change and structure disagree on (n, order)"));
    }
    let sub = Substitution::new(phi.inverse.clone(), false, s.order())?;
    let pull = |m: &JetMatrix| -> Result<JetMatrix> {
        let mut out = m.clone();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set(r, c, sub.apply(m.get(r, c))?);
            }
        }
        Ok(out)
    };
    let d = pull(&phi.jacobian())?;
    let dinv = d.inverse().map_err(|e| precondition(format!("singular Jacobian: {e}")))?;
    let m = pull(&s.matrix())?;
    let out = d.mul(&m).mul(&dinv);
    AlmostComplexStructure::from_matrix(&out)
}

/// Complex-linear change making `J(0) = J0`: `D0` sends a basis `W` of the
/// `+i` eigenspace of `M_J(0)` to `e_1..e_n`.
pub fn adapting_change(s: &AlmostComplexStructure) -> Result<CoordinateChange> {
    let n = s.n();
    let m0 = s.matrix().constant_part();
    let sq = m0.mul(&m0).add(&DMat::identity(2 * n));
    if sq.max_abs() > 1e-10 {
        return Err(precondition(format!("J(0)^2 + I has magnitude {:.3e}", sq.max_abs())));
    }
    let ihalf = Complex64::new(0.0, 0.5);
    let proj = DMat::identity(2 * n).scale(&Complex64::new(0.5, 0.0)).sub(&m0.scale(&ihalf));
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut ortho: Vec<Vec<Complex64>> = Vec::new();
    for c in 0..2 * n {
        if basis.len() == n {
            break;
        }
        let col: Vec<Complex64> = (0..2 * n).map(|r| proj[(r, c)]).collect();
        let mut w = col.clone();
        for q in &ortho {
            let dot: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= dot * qi;
            }
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            ortho.push(w.iter().map(|x| x / norm).collect());
            basis.push(col);
        }
    }
    if basis.len() != n {
        return Err(structural("the +i eigenspace of J(0) does not have dimension n"));
    }
    let q =
        DMat::from_fn(2 * n, 2 * n, |r, c| if c < n { basis[c][r] } else { basis[c - n][(r + n) % (2 * n)].conj() });
    let d0 = q.inverse()?;
    let l = DMat::from_fn(n, n, |r, c| d0[(r, c)]);
    let k = DMat::from_fn(n, n, |r, c| d0[(r, n + c)]);
    CoordinateChange::linear(&l, &k, s.order())
}

pub fn adapt_linear(s: &AlmostComplexStructure) -> Result<AlmostComplexStructure> {
    let phi = adapting_change(s)?;
    let out = transform_structure(s, &phi)?;
    if !out.is_adapted(1e-9) {
        return Err(structural("linear adaptation failed to reach J(0) = J0"));
    }
    Ok(out.snap_origin())
}
