//! Almost-complex normal coordinates of order `N`.
//!
//! In normal coordinates `B = sum_{|alpha| >= 1} B^{alpha,beta} z^alpha zbar^beta`
//! with `B^{alpha,beta}_{k,l} = 0` whenever `l >= l(alpha)`, and `A` is
//! determined by `B`.

mod form_a;
mod torsion_jet;

pub use form_a::{
    a_family_closed_form, a_family_from_matrix, a_for_b, a_from_b_closed_form, a_from_b_series, a_matrix_from_family,
    coefficient_family, family_to_matrix, Family,
};
pub use torsion_jet::{torsion_jet_diagnostic, torsion_jet_normal, J3Families, TorsionJetDiagnostic};

use crate::error::{precondition, structural, Result};
use crate::jet::{Jet, JetMatrix, Mono};
use crate::structure::{transform_structure, AlmostComplexStructure, CoordinateChange};
use num_complex::Complex64;
use serde::Serialize;

/// A structure given by its `B` in normal form, with `A` derived from `B`.
pub fn structure_from_b(b: JetMatrix) -> Result<AlmostComplexStructure> {
    let a = a_for_b(&b);
    AlmostComplexStructure::new(a, b)
}

/// Largest `|B^{alpha,beta}_{k,l}|` with `l >= l(alpha)` (1-based `l`) among
/// trusted degrees `<= upto`. Pure `zbar` terms (`alpha = 0`) always count.
pub fn normal_form_violation(b: &JetMatrix, upto: u32) -> f64 {
    let n = b.rows();
    let top = (upto as i32).min(b.effective_order());
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            for (m, c) in b.get(k, l).terms() {
                if m.degree() as i32 <= top && l + 1 >= m.l_alpha(n) {
                    worst = worst.max(c.norm());
                }
            }
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct NormalCoordinateResult {
    /// Accumulated change `z -> Z`.
    pub phi: CoordinateChange,
    pub stages: Vec<CoordinateChange>,
    pub structure: AlmostComplexStructure,
    /// `B` family after each stage.
    pub stage_b: Vec<Family<Complex64>>,
    pub b_coeffs: Family<Complex64>,
    pub a_coeffs: Family<Complex64>,
}

impl NormalCoordinateResult {
    pub fn violation(&self) -> f64 {
        normal_form_violation(self.structure.b(), self.structure.order())
    }

    /// Largest deviation of any stage from the identity.
    pub fn stage_deviation(&self) -> f64 {
        self.stages.iter().map(|s| s.deviation_from_identity()).fold(0.0, f64::max)
    }
}

/// `Z_k = z_k - sum i conj(B^{alpha-delta_L, beta}_{k,L}) / (2 alpha_L) z^beta zbar^alpha`
/// over `|alpha + beta| = m + 1`, `|alpha| >= 1`, `L = l(alpha)`, built from the
/// degree-`m` part of `B`.
pub fn stage_change(s: &AlmostComplexStructure, m: u32) -> Result<CoordinateChange> {
    let n = s.n();
    let order = s.order();
    let b = s.b();
    let mut forward: Vec<Jet> = (0..n).map(|k| Jet::z(n, order + 1, k)).collect();
    for (k, fk) in forward.iter_mut().enumerate() {
        for l in 0..n {
            let big_l = l + 1;
            for (g, c) in b.get(k, l).terms() {
                // g = (alpha - delta_L, beta) with l(alpha) = L requires l(gamma) <= L
                if g.degree() != m || g.l_alpha(n) > big_l {
                    continue;
                }
                let alpha = g.mul(Mono::var(n, l));
                let alpha_l = alpha.alpha(l) as f64;
                let coef = -Complex64::new(0.0, 1.0) * c.conj() / (2.0 * alpha_l);
                fk.add_term(alpha.conj(), coef);
            }
        }
    }
    CoordinateChange::new(forward.into_iter().map(|f| f.exact()).collect(), order)
}

/// Runs stages `m = 1..=upto`, each followed by an exact transform.
pub fn normalize_to_order(s: &AlmostComplexStructure, upto: u32) -> Result<NormalCoordinateResult> {
    if !s.is_adapted(1e-12) {
        return Err(precondition("structure is not adapted at the origin (A(0) = iI, B(0) = 0)"));
    }
    if upto == 0 || upto > s.order() {
        return Err(structural(format!("normalization order {upto} outside 1..={}", s.order())));
    }
    let mut cur = s.clone();
    let mut phi = CoordinateChange::identity(s.n(), s.order());
    let mut stages = Vec::new();
    let mut stage_b = Vec::new();
    for m in 1..=upto {
        let st = stage_change(&cur, m)?;
        if st.deviation_from_identity() > 0.0 {
            cur = transform_structure(&cur, &st)?.snap_origin();
            phi = phi.then(&st)?;
        }
        stages.push(st);
        stage_b.push(coefficient_family(cur.b()));
    }
    let b_coeffs = coefficient_family(cur.b());
    let a_coeffs = a_family_from_matrix(cur.a());
    Ok(NormalCoordinateResult { phi, stages, structure: cur, stage_b, b_coeffs, a_coeffs })
}

/// Largest change of the `B` family of degree `< m` between consecutive stages.
pub fn stage_stability(result: &NormalCoordinateResult) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, pair) in result.stage_b.windows(2).enumerate() {
        let stage = i as u32 + 2;
        for (mono, x) in pair[0].iter().chain(pair[1].iter()) {
            if mono.degree() >= stage {
                continue;
            }
            let other = if pair[0].contains_key(mono) { pair[1].get(mono) } else { pair[0].get(mono) };
            let d = match other {
                Some(y) => x.sub(y).max_abs(),
                None => x.max_abs(),
            };
            worst = worst.max(d);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphicInvarianceReport {
    /// Largest change of any `B^{alpha,beta}` with `|alpha + beta| <= N`.
    pub deviation: f64,
    /// Normal-form violation after the change.
    pub violation: f64,
}

/// Applies `Z_k = z_k + c_k(z)` with `c_k` holomorphic of degree `N + 1`.
pub fn verify_holomorphic_invariance(s: &AlmostComplexStructure, c: &[Jet]) -> Result<HolomorphicInvarianceReport> {
    let n = s.n();
    let order = s.order();
    if c.len() != n {
        return Err(structural("need one holomorphic jet per coordinate"));
    }
    let mut forward = Vec::with_capacity(n);
    for (k, ck) in c.iter().enumerate() {
        if ck.n() != n || ck.order() != order + 1 {
            return Err(structural("holomorphic change jets must have order N + 1"));
        }
        if ck.terms().any(|(m, _)| m.beta_degree() > 0 || m.degree() != order + 1) {
            return Err(precondition("change must be holomorphic and homogeneous of degree N + 1"));
        }
        forward.push((&Jet::z(n, order + 1, k) + ck).exact());
    }
    let phi = CoordinateChange::new(forward, order)?;
    let t = transform_structure(s, &phi)?;
    Ok(HolomorphicInvarianceReport { deviation: t.b().distance(s.b()), violation: normal_form_violation(t.b(), order) })
}
