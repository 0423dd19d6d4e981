//! Almost complex structures as jet matrices `A`, `B` in the coordinate frame.
//!
//! `J(d/dz_l) = sum_k A_kl d/dz_k + B_kl d/dzbar_k`, so in complexified
//! components `M_J = [[A, conj B], [B, conj A]]` and `J^2 = -I` reads
//! `A^2 = -I - conj(B) B`, `conj(A) B = -B A`.

mod change;
mod frame;

pub use change::{adapt_linear, adapting_change, transform_structure, CoordinateChange};
pub use frame::{nijenhuis_check, torsion_tensor, BracketCoefficients, Frame, TorsionTensor, VectorField};

use crate::error::{precondition, structural, Result};
use crate::jet::{DMat, Jet, JetMatrix, Mono};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct AlmostComplexStructure {
    a: JetMatrix,
    b: JetMatrix,
}

/// Residuals of the two block equations of `J^2 = -I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub square: f64,
    pub anticommute: f64,
    pub effective_order: i32,
}

impl ValidationReport {
    pub fn residual(&self) -> f64 {
        self.square.max(self.anticommute)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual() <= tol
    }
}

impl AlmostComplexStructure {
    pub fn new(a: JetMatrix, b: JetMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n || b.rows() != n || b.cols() != n {
            return Err(structural("A and B must both be n x n"));
        }
        if a.n() != n || b.n() != n || a.order() != b.order() {
            return Err(structural("A, B jets must have n variables and a common order"));
        }
        Ok(AlmostComplexStructure { a, b })
    }

    /// The standard structure `A = iI`, `B = 0`.
    pub fn j0(n: usize, order: u32) -> Self {
        let a = JetMatrix::identity(n, n, order).scale(&I);
        AlmostComplexStructure { a, b: JetMatrix::zeros(n, n, n, order) }
    }

    /// Reads `A`, `B` off a complexified `2n x 2n` matrix.
    pub fn from_matrix(m: &JetMatrix) -> Result<Self> {
        let n = m.rows() / 2;
        if m.rows() != 2 * n || m.cols() != 2 * n {
            return Err(structural("structure matrix must be 2n x 2n"));
        }
        Self::new(m.block(0, 0, n, n), m.block(n, 0, n, n))
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn order(&self) -> u32 {
        self.a.order()
    }

    pub fn a(&self) -> &JetMatrix {
        &self.a
    }

    pub fn b(&self) -> &JetMatrix {
        &self.b
    }

    pub fn effective_order(&self) -> i32 {
        self.a.effective_order().min(self.b.effective_order())
    }

    /// `M_J = [[A, conj B], [B, conj A]]`.
    pub fn matrix(&self) -> JetMatrix {
        JetMatrix::from_blocks(&self.a, &self.b.conj(), &self.b, &self.a.conj())
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.n();
        let order = self.order();
        let id = JetMatrix::identity(n, n, order);
        let sq = self.a.mul(&self.a).add(&id).add(&self.b.conj().mul(&self.b));
        let anti = self.a.conj().mul(&self.b).add(&self.b.mul(&self.a));
        ValidationReport {
            square: sq.residual(),
            anticommute: anti.residual(),
            effective_order: self.effective_order(),
        }
    }

    /// `A(0) = iI` and `B(0) = 0` within `tol`.
    pub fn is_adapted(&self, tol: f64) -> bool {
        let n = self.n();
        let a0 = self.a.constant_part();
        let b0 = self.b.constant_part();
        a0.sub(&DMat::identity(n).scale(&I)).max_abs() <= tol && b0.max_abs() <= tol
    }

    /// Replaces the constant terms by the exact adapted values.
    pub(crate) fn snap_origin(mut self) -> Self {
        let n = self.n();
        for k in 0..n {
            for l in 0..n {
                let c = if k == l { I } else { Complex64::new(0.0, 0.0) };
                self.a.get_mut(k, l).set_term(Mono::ONE, c);
                self.b.get_mut(k, l).set_term(Mono::ONE, Complex64::new(0.0, 0.0));
            }
        }
        self
    }

    pub fn truncate(&self, d: i32) -> Self {
        AlmostComplexStructure { a: self.a.truncate(d), b: self.b.truncate(d) }
    }
}

/// `sigma(P)`: swap the `z`/`zbar` halves and conjugate; real operators are fixed points.
fn sigma(p: &JetMatrix) -> JetMatrix {
    let n = p.rows() / 2;
    let sw = |i: usize| if i < n { i + n } else { i - n };
    JetMatrix::from_fn(p.rows(), p.cols(), |i, j| p.get(sw(i), sw(j)).conj())
}

/// `J = (I + P) J0 (I + P)^{-1}` with `P` replaced by its real part
/// `(P + sigma P) / 2`, followed by [`adapt_linear`].
pub fn structure_from_deformation(p: &JetMatrix) -> Result<AlmostComplexStructure> {
    let n = p.rows() / 2;
    if p.rows() != 2 * n || p.cols() != 2 * n || p.n() != n {
        return Err(structural("deformation must be a 2n x 2n jet matrix in n variables"));
    }
    let order = p.order();
    let half = Complex64::new(0.5, 0.0);
    let psym = p.add(&sigma(p)).scale(&half);
    let p0 = psym.constant_part();
    let bound = p0.norm_inf();
    if bound >= 1.0 {
        return Err(precondition(format!("row sums of |P(0)| reach {bound:.3}; I + P may be singular")));
    }
    let ip = JetMatrix::identity(2 * n, n, order).add(&psym);
    let j0 = AlmostComplexStructure::j0(n, order).matrix();
    let inv = ip.inverse().map_err(|_| precondition("I + P is singular"))?;
    let j = ip.mul(&j0).mul(&inv);
    let raw = AlmostComplexStructure::from_matrix(&j)?;
    adapt_linear(&raw)
}

/// Seeded random deformation: small constant part plus terms of every
/// degree up to `order`, about half the monomials populated.
pub fn random_deformation(n: usize, order: u32, seed: u64) -> JetMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monos = Mono::all(n, order);
    let entry = |rng: &mut ChaCha8Rng| {
        let mut f = Jet::zero(n, order);
        for &m in &monos {
            let d = m.degree();
            let amp = if d == 0 { 0.08 } else { 0.25 / d as f64 };
            if d > 0 && rng.gen_bool(0.5) {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            f.add_term(m, c);
        }
        f.exact()
    };
    let mut p = JetMatrix::zeros(2 * n, 2 * n, n, order);
    for i in 0..2 * n {
        for j in 0..2 * n {
            p.set(i, j, entry(&mut rng));
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn j0_validates_exactly() {
        let s = AlmostComplexStructure::j0(2, 4);
        let r = s.validate();
        assert_eq!(r.residual(), 0.0);
        assert!(s.is_adapted(0.0));
    }

    #[test]
    fn inconsistent_structure_is_flagged() {
        let n = 2;
        let mut b = JetMatrix::zeros(n, n, n, 4);
        b.set(0, 0, Jet::z(n, 4, 0));
        let s = AlmostComplexStructure::new(AlmostComplexStructure::j0(n, 4).a().clone(), b).unwrap();
        let r = s.validate();
        // conj(A)B + BA = (-i + i) z1 = 0 but A^2 + I + conj(B)B = |z1|^2 E11
        assert!((r.residual() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_deformation_is_j0() {
        let p = JetMatrix::zeros(4, 4, 2, 3);
        let s = structure_from_deformation(&p).unwrap();
        assert_eq!(s, AlmostComplexStructure::j0(2, 3));
    }

    #[test]
    fn single_entry_deformation_validates() {
        let n = 2;
        let mut p = JetMatrix::zeros(2 * n, 2 * n, n, 4);
        // mixes d/dzbar_1 into d/dz_1, so J is no longer J0
        p.set(0, n, Jet::z(n, 4, 0).scale(&c(0.1, 0.0)));
        let s = structure_from_deformation(&p).unwrap();
        assert!(s.validate().residual() < 1e-12);
        assert!(s.is_adapted(0.0));
        assert!(s.b().residual() > 1e-3);
    }

    #[test]
    fn random_deformations_validate() {
        for (n, seed) in [(2, 1u64), (3, 2)] {
            let p = random_deformation(n, 4, seed);
            let s = structure_from_deformation(&p).unwrap();
            assert!(s.validate().residual() < 1e-11, "seed {seed}");
            assert!(s.is_adapted(0.0));
        }
    }

    #[test]
    fn large_constant_deformation_rejected() {
        let n = 1;
        let mut p = JetMatrix::zeros(2, 2, n, 2);
        p.set(0, 0, Jet::constant(n, 2, c(1.5, 0.0)));
        p.set(1, 1, Jet::constant(n, 2, c(1.5, 0.0)));
        assert!(matches!(structure_from_deformation(&p), Err(crate::GeomError::Precondition(_))));
    }
}
