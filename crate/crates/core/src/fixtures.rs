//! Standard structures and metrics used by the tests, the acceptance run and the CLI.

use crate::chern::HermitianData;
use crate::jet::{Jet, JetMatrix, Mono};
use crate::normal_coords::{normalize_to_order, structure_from_b};
use crate::structure::{random_deformation, structure_from_deformation, AlmostComplexStructure};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The `B^2_{1,1}` coefficient of FIX-B.
pub const FIXB_B: Complex64 = Complex64::new(0.3, 0.1);

pub fn fix_j0(n: usize, order: u32) -> AlmostComplexStructure {
    AlmostComplexStructure::j0(n, order)
}

/// `n = 2`, `B_{1,1} = b z_2` with `b = 0.3 + 0.1i`, `A` from `B`.
pub fn fix_b(order: u32) -> AlmostComplexStructure {
    fix_b_with(order, FIXB_B)
}

pub fn fix_b_with(order: u32, b: Complex64) -> AlmostComplexStructure {
    let mut m = JetMatrix::zeros(2, 2, 2, order);
    m.set(0, 0, Jet::monomial(2, order, Mono::new(&[0, 1], &[0, 0]), b).exact());
    structure_from_b(m).expect("FIX-B is a valid structure")
}

/// FIX-B with a vanishing torsion 1-jet: only the quadratic coefficient `B_{1,1} = b z_2^2`.
pub fn fix_b_quadratic(order: u32) -> AlmostComplexStructure {
    let mut m = JetMatrix::zeros(2, 2, 2, order);
    m.set(0, 0, Jet::monomial(2, order, Mono::new(&[0, 2], &[0, 0]), FIXB_B).exact());
    structure_from_b(m).expect("valid structure")
}

pub fn random_structure(n: usize, order: u32, seed: u64) -> AlmostComplexStructure {
    structure_from_deformation(&random_deformation(n, order, seed)).expect("random deformations are small")
}

/// A random structure brought to normal coordinates of order 3.
pub fn random_normal_structure(n: usize, order: u32, seed: u64) -> AlmostComplexStructure {
    normalize_to_order(&random_structure(n, order, seed), 3).expect("normalisable").structure
}

/// `h_{1,2} = 2a z_1`: the metric of the potential `|z|^2 + (a z_1^2 zbar_2 + c.c.)`, so `d omega = 0` on J0.
pub fn symplectic_metric(n: usize, order: u32, a: Complex64) -> HermitianData {
    let mut h = JetMatrix::identity(n, n, order);
    h.set(0, 1, Jet::z(n, order, 0).scale(&(2.0 * a)));
    h.set(1, 0, h.get(0, 1).conj());
    HermitianData::new(h).expect("positive at 0")
}

/// `h_{1,2} = 0.2 z_2`: not closed on J0.
pub fn nonclosed_metric(n: usize, order: u32) -> HermitianData {
    let mut h = JetMatrix::identity(n, n, order);
    h.set(0, 1, Jet::z(n, order, 1).scale(&Complex64::new(0.2, 0.0)));
    h.set(1, 0, h.get(0, 1).conj());
    HermitianData::new(h).expect("positive at 0")
}

/// `H(0) = I` plus random coefficients of degree 1 (optional) and 2.
pub fn random_metric(n: usize, order: u32, seed: u64, linear: bool) -> HermitianData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = JetMatrix::identity(n, n, order);
    for l in 0..n {
        for k in l..n {
            let mut f = Jet::zero(n, order);
            for m in Mono::all(n, 2) {
                if m.degree() == 0 || (m.degree() == 1 && !linear) {
                    continue;
                }
                f.add_term(m, Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)));
            }
            if l == k {
                f = &(&f + &f.conj()).scale(&Complex64::new(0.5, 0.0)) + &Jet::one(n, order);
            }
            h.set(l, k, f.clone());
            if l != k {
                h.set(k, l, f.conj());
            }
        }
    }
    HermitianData::new(h).expect("small perturbation of the identity")
}
