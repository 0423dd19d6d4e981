use super::{Form, Geometry, Op};
use crate::error::Result;
use crate::jet::{Jet, Mono};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityRow {
    pub identity: String,
    pub max_residual: f64,
    /// Lowest degree up to which both sides were compared.
    pub order_checked: i32,
}

/// Seeded jet with dyadic coefficients `k/64`, about half the monomials populated.
pub fn random_test_function(n: usize, order: u32, seed: u64) -> Jet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Jet::zero(n, order);
    for m in Mono::all(n, order) {
        if rng.gen_bool(0.5) {
            let re = rng.gen_range(-32i32..=32) as f64 / 64.0;
            let im = rng.gen_range(-32i32..=32) as f64 / 64.0;
            f.add_term(m, Complex64::new(re, im));
        }
    }
    f
}

type Side = fn(&Geometry, &Form) -> Result<Form>;

fn ap(g: &Geometry, a: Op, b: Op, u: &Form) -> Result<Form> {
    g.apply(a, &g.apply(b, u)?)
}

fn anti(g: &Geometry, a: Op, b: Op, u: &Form) -> Result<Form> {
    ap(g, a, b, u)?.try_add(&ap(g, b, a, u)?)
}

const IDENTITIES: [(&str, Side, Side); 7] = [
    (
        "del^2 = delbar theta + theta delbar",
        |g, u| ap(g, Op::Del, Op::Del, u),
        |g, u| anti(g, Op::Delbar, Op::Theta, u),
    ),
    (
        "delbar^2 = del thetabar + thetabar del",
        |g, u| ap(g, Op::Delbar, Op::Delbar, u),
        |g, u| anti(g, Op::Del, Op::Thetabar, u),
    ),
    (
        "del delbar + delbar del = -(theta thetabar + thetabar theta)",
        |g, u| anti(g, Op::Del, Op::Delbar, u),
        |g, u| Ok(anti(g, Op::Theta, Op::Thetabar, u)?.neg()),
    ),
    ("del theta = -theta del", |g, u| ap(g, Op::Del, Op::Theta, u), |g, u| Ok(ap(g, Op::Theta, Op::Del, u)?.neg())),
    (
        "delbar thetabar = -thetabar delbar",
        |g, u| ap(g, Op::Delbar, Op::Thetabar, u),
        |g, u| Ok(ap(g, Op::Thetabar, Op::Delbar, u)?.neg()),
    ),
    ("theta^2 = 0", |g, u| ap(g, Op::Theta, Op::Theta, u), |g, u| Ok(Form::zero(g.n(), g.order(), u.basis()))),
    ("thetabar^2 = 0", |g, u| ap(g, Op::Thetabar, Op::Thetabar, u), |g, u| Ok(Form::zero(g.n(), g.order(), u.basis()))),
];

/// Residuals of the seven identities over all `f zeta*_K ^ zetabar*_L` with
/// `|K| + |L| <= 2` and seeded random coefficients `f`.
pub fn fundamental_identities_check(g: &Geometry, seed: u64) -> Result<Vec<IdentityRow>> {
    let n = g.n();
    let masks: Vec<u16> = (0u16..1 << (2 * n)).filter(|m| m.count_ones() <= 2).collect();
    let per_mask: Vec<Vec<(f64, i32)>> = masks
        .par_iter()
        .map(|&mask| {
            let f = random_test_function(n, g.order(), seed ^ (mask as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let gens: Vec<usize> = (0..2 * n).filter(|b| mask & (1 << b) != 0).collect();
            let u = Form::monomial(&gens, f, g.basis())?;
            IDENTITIES
                .iter()
                .map(|(_, lhs, rhs)| {
                    let diff = lhs(g, &u)?.try_sub(&rhs(g, &u)?)?;
                    Ok((diff.residual(), diff.effective_order()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(IDENTITIES
        .iter()
        .enumerate()
        .map(|(i, (name, _, _))| IdentityRow {
            identity: name.to_string(),
            max_residual: per_mask.iter().map(|r| r[i].0).fold(0.0, f64::max),
            order_checked: per_mask.iter().map(|r| r[i].1).min().unwrap_or(g.order() as i32),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetMatrix;
    use crate::normal_coords::structure_from_b;
    use crate::structure::{random_deformation, structure_from_deformation, AlmostComplexStructure};

    fn fixb() -> AlmostComplexStructure {
        let mut b = JetMatrix::zeros(2, 2, 2, 4);
        b.set(0, 0, Jet::monomial(2, 4, Mono::new(&[0, 1], &[0, 0]), Complex64::new(0.3, 0.1)).exact());
        structure_from_b(b).unwrap()
    }

    #[test]
    fn j0_identities_exact() {
        let g = Geometry::new(&AlmostComplexStructure::j0(2, 4)).unwrap();
        for row in fundamental_identities_check(&g, 1).unwrap() {
            assert_eq!(row.max_residual, 0.0, "{}", row.identity);
        }
    }

    #[test]
    fn fixb_identities() {
        let g = Geometry::new(&fixb()).unwrap();
        for row in fundamental_identities_check(&g, 2).unwrap() {
            assert!(row.max_residual < 1e-10, "{} {}", row.identity, row.max_residual);
            assert!(row.order_checked >= 2);
        }
    }

    #[test]
    fn random_three_dimensional_identities() {
        let s = structure_from_deformation(&random_deformation(3, 4, 17)).unwrap();
        let g = Geometry::new(&s).unwrap();
        for row in fundamental_identities_check(&g, 3).unwrap() {
            assert!(row.max_residual < 1e-10, "{} {}", row.identity, row.max_residual);
        }
    }
}
