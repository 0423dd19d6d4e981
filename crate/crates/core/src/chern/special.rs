use super::{chern_connection, curvature, hermitian_prime_part, ConnectionForms, CurvatureTensor, HermitianData, I};
use crate::error::{precondition, Result};
use crate::forms::{FormMatrix, Geometry, Op};
use crate::jet::{Jet, JetMatrix, Mono};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Frame change `e' = e g`: returns `(H', A')` with `H' = g^t H conj(g)`,
/// `A'' -> g^{-1}(delbar g + A'' g)`, `A' -> g^{-1}(del g + A' g)`.
pub fn change_frame(
    geo: &Geometry,
    h: &JetMatrix,
    conn: &ConnectionForms,
    g: &JetMatrix,
) -> Result<(JetMatrix, ConnectionForms)> {
    let ginv = g.inverse()?;
    let h2 = g.transpose().mul(h).mul(&g.conj());
    let a2 = FormMatrix::differential(geo, g, Op::Delbar)?.add(&conn.asecond.right(g)?)?.left(&ginv)?;
    let a1 = FormMatrix::differential(geo, g, Op::Del)?.add(&conn.aprime.right(g)?)?.left(&ginv)?;
    Ok((h2, ConnectionForms { aprime: a1, asecond: a2 }))
}

#[derive(Clone, Debug)]
pub struct SpecialFrame {
    /// `sigma = zeta g`.
    pub g: JetMatrix,
    pub h: JetMatrix,
    pub conn: ConnectionForms,
    /// Largest `|A''_sigma(0)|`.
    pub a2_origin: f64,
    /// Largest `|(del A''_sigma)(0)|`.
    pub da2_origin: f64,
    /// Largest linear coefficient of `H_sigma`.
    pub h_linear: f64,
    /// Largest `z_j z_k` or `zbar_j zbar_k` coefficient of `H_sigma`.
    pub h_pure_quadratic: f64,
    /// Distance between the transformed `A'` and the one recomputed from `(H_sigma, A''_sigma)`.
    pub consistency: f64,
}

fn origin_max(m: &FormMatrix, n: usize) -> f64 {
    m.max_abs_at(&vec![Complex64::new(0.0, 0.0); n])
}

/// Two-stage frame change: `g0 = I - sum_r A_e(0)(e_r) x_r` kills `A(0)`, then
/// `sigma_l = e_l - sum (H^{j,k}_{l,m} z_j z_k + (del A''_e)^{j,kbar}_{m,l}(0) z_j zbar_k) e_m`.
pub fn special_frame(geo: &Geometry, hd: &HermitianData) -> Result<SpecialFrame> {
    let n = geo.n();
    let order = geo.order();
    if !geo.structure().is_adapted(1e-12) || !hd.is_identity_at_origin(1e-12) {
        return Err(precondition("special frame needs J(0) = J0 and H(0) = I"));
    }
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let conn = chern_connection(geo, hd)?;
    let a = conn.total()?;
    let g0 = JetMatrix::from_fn(n, n, |i, j| {
        let mut f = if i == j { Jet::one(n, order) } else { Jet::zero(n, order) };
        for r in 0..2 * n {
            let c = a.coefficient_at(i, j, 1 << r, &zero);
            if c != Complex64::new(0.0, 0.0) {
                f.add_term(Mono::var(n, r), -c);
            }
        }
        f.exact()
    });
    let (h1, conn1) = change_frame(geo, hd.matrix(), &conn, &g0)?;
    let da2 = conn1.asecond.apply(geo, Op::Del)?;
    let g1 = JetMatrix::from_fn(n, n, |m, l| {
        let mut f = if m == l { Jet::one(n, order) } else { Jet::zero(n, order) };
        for (mono, c) in h1.get(l, m).terms() {
            if mono.degree() == 2 && mono.beta_degree() == 0 {
                f.add_term(*mono, -c);
            }
        }
        for j in 0..n {
            for k in 0..n {
                let c = da2.coefficient_at(m, l, (1 << j) | (1 << (n + k)), &zero);
                f.add_term(Mono::var(n, j).mul(Mono::var(n, n + k)), -c);
            }
        }
        f.exact()
    });
    let (h2, conn2) = change_frame(geo, &h1, &conn1, &g1)?;
    let total = g0.mul(&g1);

    let a2_origin = origin_max(&conn2.asecond, n);
    let da2_origin = origin_max(&conn2.asecond.apply(geo, Op::Del)?, n);
    let mut h_linear: f64 = 0.0;
    let mut h_pure_quadratic: f64 = 0.0;
    for e in h2.entries() {
        for (m, c) in e.terms() {
            match m.degree() {
                1 => h_linear = h_linear.max(c.norm()),
                2 if m.alpha_degree() == 0 || m.beta_degree() == 0 => h_pure_quadratic = h_pure_quadratic.max(c.norm()),
                _ => {}
            }
        }
    }
    let recomputed = hermitian_prime_part(geo, &h2, &conn2.asecond)?;
    let consistency = recomputed.distance(&conn2.aprime);
    Ok(SpecialFrame { g: total, h: h2, conn: conn2, a2_origin, da2_origin, h_linear, h_pure_quadratic, consistency })
}

#[derive(Clone, Debug, Serialize)]
pub struct LemchernReport {
    /// `C^h(xi sigma_k, eta sigma_l) = del-bar-del h_{kl}(xi^{1,0}, eta^{0,1}) + h(D_{xi^{1,0}} sigma_k, D_{eta^{1,0}} sigma_l)`.
    pub spec_residual: f64,
    /// `i del delbar |sigma_k|^2 (xi, J xi) = -2 C^h(xi sigma_k, xi sigma_k) + 2 |D_{xi^{1,0}} sigma_k|^2`.
    pub psh_residual: f64,
}

/// Checks the two pointwise curvature identities at 0 in a special frame on random real vectors.
pub fn lemchern_check(geo: &Geometry, sf: &SpecialFrame, seed: u64) -> Result<LemchernReport> {
    let n = geo.n();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let blocks = curvature(geo, &sf.conn)?;
    let c: CurvatureTensor = blocks.c_origin.clone();
    let h0 = sf.h.eval(&zero);
    let dh = FormMatrix::differential(geo, &sf.h, Op::Del)?;
    let dbdh = dh.apply(geo, Op::Delbar)?;
    let ddbh = FormMatrix::differential(geo, &sf.h, Op::Delbar)?.apply(geo, Op::Del)?;
    // D_{v} sigma_k = sum_a (sum_j v_j A'_{a,k}(zeta_j)) sigma_a
    let dsec = |v: &[Complex64], k: usize| -> Vec<Complex64> {
        (0..n)
            .map(|a| (0..n).map(|j| v[j] * sf.conn.aprime.coefficient_at(a, k, 1 << j, &zero)).sum::<Complex64>())
            .collect()
    };
    let hpair = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                s += x[a] * y[b].conj() * h0[(a, b)];
            }
        }
        s
    };
    let ch = |v: &[Complex64], w: &[Complex64], k: usize, l: usize| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for kk in 0..n {
                for a in 0..n {
                    s += v[j] * w[kk].conj() * c.get(j, kk, a, k) * h0[(a, l)];
                }
            }
        }
        s
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec_residual: f64 = 0.0;
    let mut psh_residual: f64 = 0.0;
    for _ in 0..4 {
        let mut rv =
            || (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
        let (v, w) = (rv(), rv());
        let x10: Vec<Complex64> =
            v.iter().copied().chain(std::iter::repeat(Complex64::new(0.0, 0.0)).take(n)).collect();
        let y01: Vec<Complex64> =
            std::iter::repeat(Complex64::new(0.0, 0.0)).take(n).chain(w.iter().map(|c| c.conj())).collect();
        let xi: Vec<Complex64> = v.iter().copied().chain(v.iter().map(|c| c.conj())).collect();
        let jxi: Vec<Complex64> = v.iter().map(|c| I * c).chain(v.iter().map(|c| -I * c.conj())).collect();
        for k in 0..n {
            for l in 0..n {
                let lhs = ch(&v, &w, k, l);
                let rhs = dbdh.get(k, l).pair2(&x10, &y01, &zero) + hpair(&dsec(&v, k), &dsec(&w, l));
                spec_residual = spec_residual.max((lhs - rhs).norm());
            }
            let lhs = I * ddbh.get(k, k).pair2(&xi, &jxi, &zero);
            let d = dsec(&v, k);
            let rhs = -2.0 * ch(&v, &v, k, k) + 2.0 * hpair(&d, &d);
            psh_residual = psh_residual.max((lhs - rhs).norm());
        }
    }
    Ok(LemchernReport { spec_residual, psh_residual })
}
