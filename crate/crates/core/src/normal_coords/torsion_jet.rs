//! First-order jet of the torsion in normal coordinates of order 3.

use super::normal_form_violation;
use crate::error::{precondition, Result};
use crate::jet::{DMat, Jet, Mono};
use crate::structure::{AlmostComplexStructure, BracketCoefficients, Frame};
use num_complex::Complex64;
use serde::Serialize;

/// Low-degree slices of `B` (0-based indices):
/// `B = sum_r B^r z_r + sum_{r,s} (B^{r,s} z_r z_s + B^{r,sbar} z_r zbar_s) + ...`
/// with `B^{r,s}` symmetric.
#[derive(Clone, Debug)]
pub struct J3Families {
    pub b1: Vec<DMat>,
    pub b2: Vec<Vec<DMat>>,
    pub bmix: Vec<Vec<DMat>>,
}

impl J3Families {
    pub fn from_structure(s: &AlmostComplexStructure) -> Self {
        let n = s.n();
        let b = s.b();
        let coef = |m: Mono| DMat::from_fn(n, n, |k, l| b.get(k, l).coeff(m));
        let e = |r: usize| {
            let mut a = vec![0u32; n];
            a[r] = 1;
            a
        };
        let zero = vec![0u32; n];
        let b1 = (0..n).map(|r| coef(Mono::new(&e(r), &zero))).collect();
        let b2 = (0..n)
            .map(|r| {
                (0..n)
                    .map(|s| {
                        let m = Mono::new(&e(r), &zero).mul(Mono::new(&e(s), &zero));
                        let w = if r == s { 1.0 } else { 0.5 };
                        coef(m).scale(&Complex64::new(w, 0.0))
                    })
                    .collect()
            })
            .collect();
        let bmix = (0..n).map(|r| (0..n).map(|s| coef(Mono::new(&e(r), &e(s)))).collect()).collect();
        J3Families { b1, b2, bmix }
    }

    pub fn n(&self) -> usize {
        self.b1.len()
    }
}

fn require_normal(s: &AlmostComplexStructure) -> Result<()> {
    let upto = s.order().min(3);
    let v = normal_form_violation(s.b(), upto);
    if v > 1e-9 || !s.is_adapted(1e-12) {
        return Err(precondition(format!("structure is not in normal form (violation {v:.3e})")));
    }
    Ok(())
}

/// `conj(N)^r_{k,l}(z) = (i/2) B^l_{r,k} + (i/2) sum_s [2 (B^{l,s}_{r,k} - B^{k,s}_{r,l}) z_s + B^{l,sbar}_{r,k} zbar_s]`
/// for `k < l`, extended antisymmetrically; indexed `[r][k][l]`, trusted to degree 1.
pub fn torsion_jet_normal(s: &AlmostComplexStructure) -> Result<Vec<Vec<Vec<Jet>>>> {
    require_normal(s)?;
    let n = s.n();
    let order = s.order();
    let f = J3Families::from_structure(s);
    let ih = Complex64::new(0.0, 0.5);
    let zero = Jet::zero(n, order).with_effective_order(1);
    let mut out = vec![vec![vec![zero; n]; n]; n];
    for r in 0..n {
        for k in 0..n {
            for l in k + 1..n {
                let mut j = Jet::constant(n, order, ih * f.b1[l][(r, k)]);
                for sidx in 0..n {
                    let lin = 2.0 * (f.b2[l][sidx][(r, k)] - f.b2[k][sidx][(r, l)]);
                    j.add_term(Mono::var(n, sidx), ih * lin);
                    j.add_term(Mono::var(n, n + sidx), ih * f.bmix[l][sidx][(r, k)]);
                }
                let j = j.with_effective_order(1);
                out[r][l][k] = -&j;
                out[r][k][l] = j;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionJetDiagnostic {
    pub k: u32,
    /// The `k`-jet of the torsion computed from frame brackets vanishes.
    pub torsion_jet_vanishes: bool,
    /// The same, decided from `B^l_{r,k}`, `T^{k,l,s}_r = B^{l,s}_{r,k} - B^{k,s}_{r,l}`
    /// and `B^{l,sbar}_{r,k}` (`k < l`).
    pub formula_jet_vanishes: bool,
    /// All coefficients of `B` of degree `<= k + 1` vanish.
    pub b_vanishes: bool,
}

impl TorsionJetDiagnostic {
    /// The equivalence "torsion `k`-jet vanishes iff `B` vanishes at order `k + 1`".
    pub fn equivalence_holds(&self) -> bool {
        self.torsion_jet_vanishes == self.b_vanishes && self.formula_jet_vanishes == self.b_vanishes
    }
}

pub fn torsion_jet_diagnostic(s: &AlmostComplexStructure, k: u32, tol: f64) -> Result<TorsionJetDiagnostic> {
    if k > 1 {
        return Err(precondition("torsion jet diagnostic covers k = 0, 1"));
    }
    require_normal(s)?;
    let n = s.n();
    let frame = Frame::new(s)?;
    let bc = BracketCoefficients::new(&frame);
    let torsion_jet_vanishes = bc.nbar.iter().flatten().flatten().all(|j| j.truncate(k as i32).max_abs() <= tol);

    let f = J3Families::from_structure(s);
    let mut formula = 0.0f64;
    for r in 0..n {
        for a in 0..n {
            for l in a + 1..n {
                formula = formula.max(f.b1[l][(r, a)].norm());
                if k == 1 {
                    for sidx in 0..n {
                        let t = f.b2[l][sidx][(r, a)] - f.b2[a][sidx][(r, l)];
                        formula = formula.max(t.norm()).max(f.bmix[l][sidx][(r, a)].norm());
                    }
                }
            }
        }
    }
    let b_vanishes = s.b().entries().all(|e| e.truncate(k as i32 + 1).max_abs() <= tol);
    Ok(TorsionJetDiagnostic { k, torsion_jet_vanishes, formula_jet_vanishes: formula <= tol, b_vanishes })
}
