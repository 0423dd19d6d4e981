//! Hermitian metrics on `T^{1,0}`, the Chern connection and its curvature,
//! the Levi-Civita connection and the comparison between the two.

mod asymptotics;
mod decomposition;
mod levi_civita;
mod special;

pub use asymptotics::{
    antisymmetrize_linear_terms, connection_asymptotics, jetmetri_check, symplectic_normalize, transform_metric,
    Antisymmetrization, AsymptoticsReport, JetmetriReport, SFamilies, SymplecticNormalization,
};
pub use decomposition::{chern_lc_decomposition, ChernLCDecomposition, FrameTensor};
pub use levi_civita::reality_defect;
pub use levi_civita::{chern_coordinate_connection, levi_civita, metric_tensor, CoordinateConnection};
pub use special::{change_frame, lemchern_check, special_frame, LemchernReport, SpecialFrame};

use crate::error::{precondition, structural, Result};
use crate::forms::{Form, FormMatrix, Geometry, Op};
use crate::jet::{DMat, Jet, JetMatrix, Mono};
use crate::normal_coords::{normal_form_violation, J3Families};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

fn unit(n: usize, k: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[k] = 1;
    v
}

/// Hermitian matrix `h_{l,m} = h(zeta_l, zeta_m)` in the `zeta` frame.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianData {
    h: JetMatrix,
}

impl HermitianData {
    pub fn new(h: JetMatrix) -> Result<Self> {
        if h.rows() != h.cols() {
            return Err(structural("metric matrix must be square"));
        }
        let defect = h.distance(&h.conj_transpose());
        if defect > 1e-12 {
            return Err(precondition(format!("metric is not hermitian (defect {defect:.3e})")));
        }
        let h0 = h.constant_part();
        if !positive_definite(&h0) {
            return Err(precondition("metric is not positive definite at 0"));
        }
        Ok(HermitianData { h })
    }

    pub fn identity(n: usize, order: u32) -> Self {
        HermitianData { h: JetMatrix::identity(n, n, order) }
    }

    /// Reads `h` off a real `(1,1)`-form `omega = (i/2) sum h_{l,m} zeta*_l ^ zetabar*_m`.
    pub fn from_omega(omega: &Form) -> Result<Self> {
        let n = omega.n();
        let h = JetMatrix::from_fn(n, n, |l, m| {
            omega.coeff((1 << l) | (1 << (n + m))).map_or(Jet::zero(n, omega.order()), |c| c.scale(&(-2.0 * I)))
        });
        HermitianData::new(h)
    }

    pub fn matrix(&self) -> &JetMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.rows()
    }

    pub fn order(&self) -> u32 {
        self.h.order()
    }

    /// `omega = (i/2) sum h_{l,m} zeta*_l ^ zetabar*_m` in the frame of `g`.
    pub fn omega(&self, g: &Geometry) -> Result<Form> {
        let n = self.n();
        let mut out = Form::zero(n, g.order(), g.basis());
        for l in 0..n {
            for m in 0..n {
                let c = self.h.get(l, m).scale(&(0.5 * I));
                out = out.try_add(&Form::monomial(&[l, n + m], c, g.basis())?)?;
            }
        }
        Ok(out)
    }

    fn slice(&self, m: Mono, w: f64) -> DMat {
        let n = self.n();
        DMat::from_fn(n, n, |l, k| self.h.get(l, k).coeff(m) * w)
    }

    /// `H^p_{l,m}`: coefficient of `z_p` in `h_{l,m}`, as a matrix in `(l, m)`.
    pub fn linear(&self, p: usize) -> DMat {
        let n = self.n();
        self.slice(Mono::new(&unit(n, p), &vec![0; n]), 1.0)
    }

    /// `H^{p,h}_{l,m}`, symmetrized coefficient of `z_p z_h`.
    pub fn quadratic(&self, p: usize, h: usize) -> DMat {
        let n = self.n();
        let m = Mono::new(&unit(n, p), &vec![0; n]).mul(Mono::new(&unit(n, h), &vec![0; n]));
        self.slice(m, if p == h { 1.0 } else { 0.5 })
    }

    /// `H^{p,hbar}_{l,m}`, coefficient of `z_p zbar_h`.
    pub fn mixed(&self, p: usize, h: usize) -> DMat {
        let n = self.n();
        self.slice(Mono::new(&unit(n, p), &unit(n, h)), 1.0)
    }

    pub fn is_identity_at_origin(&self, tol: f64) -> bool {
        self.h.constant_part().sub(&DMat::identity(self.n())).max_abs() <= tol
    }
}

fn positive_definite(m: &DMat) -> bool {
    // Cholesky on the hermitian matrix.
    let n = m.rows();
    let mut l: DMat = DMat::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Connection matrix `A = A' + A''` of a frame `e` of `T^{1,0}`: `nabla e_j = sum_i e_i A_{ij}`.
#[derive(Clone, Debug)]
pub struct ConnectionForms {
    pub aprime: FormMatrix,
    pub asecond: FormMatrix,
}

impl ConnectionForms {
    pub fn total(&self) -> Result<FormMatrix> {
        self.aprime.add(&self.asecond)
    }
}

/// `(A'')_{k,j} = -sum_r U^k_{j,r} zetabar*_r`.
pub fn canonical_delbar_connection(g: &Geometry) -> FormMatrix {
    let n = g.n();
    let bc = g.brackets();
    FormMatrix::from_fn(n, |k, j| {
        let mut f = Form::zero(n, g.order(), g.basis());
        for r in 0..n {
            let c = -&bc.u[k][j][r];
            f = f.try_add(&Form::monomial(&[n + r], c, g.basis()).expect("generator")).expect("same basis");
        }
        f
    })
}

/// `A' = conj(H)^{-1} (del conj(H) - conj(A'')^t conj(H))` for a given `(0,1)` part.
pub fn hermitian_prime_part(g: &Geometry, h: &JetMatrix, asecond: &FormMatrix) -> Result<FormMatrix> {
    let hbar = h.conj();
    let hinv = hbar.inverse().map_err(|_| precondition("metric is singular at 0"))?;
    let dh = FormMatrix::differential(g, &hbar, Op::Del)?;
    dh.sub(&asecond.conj().transpose().right(&hbar)?)?.left(&hinv)
}

pub fn chern_connection(g: &Geometry, hd: &HermitianData) -> Result<ConnectionForms> {
    check_dims(g, hd)?;
    let asecond = canonical_delbar_connection(g);
    let aprime = hermitian_prime_part(g, hd.matrix(), &asecond)?;
    Ok(ConnectionForms { aprime, asecond })
}

fn check_dims(g: &Geometry, hd: &HermitianData) -> Result<()> {
    if hd.n() != g.n() || hd.order() != g.order() {
        return Err(structural("metric and structure have different dimension or order"));
    }
    Ok(())
}

/// Residual of `dH = A^t H + H conj(A)`, i.e. `d h(e_l, e_m) = h(nabla e_l, e_m) + h(e_l, nabla e_m)`.
pub fn compatibility_residual(g: &Geometry, h: &JetMatrix, conn: &ConnectionForms) -> Result<f64> {
    let a = conn.total()?;
    let dh = FormMatrix::differential(g, h, Op::Del)?.add(&FormMatrix::differential(g, h, Op::Delbar)?)?;
    let rhs = a.transpose().right(h)?.add(&a.conj().left(h)?)?;
    Ok(dh.distance(&rhs))
}

/// `C^{j,k}_{m,l}`: coefficient of `zeta*_j ^ zetabar*_k` in entry `(m, l)` of `Theta^{1,1}` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub n: usize,
    values: Vec<Complex64>,
}

impl CurvatureTensor {
    pub fn zero(n: usize) -> Self {
        CurvatureTensor { n, values: vec![Complex64::new(0.0, 0.0); n * n * n * n] }
    }

    fn idx(&self, j: usize, k: usize, m: usize, l: usize) -> usize {
        ((j * self.n + k) * self.n + m) * self.n + l
    }

    pub fn get(&self, j: usize, k: usize, m: usize, l: usize) -> Complex64 {
        self.values[self.idx(j, k, m, l)]
    }

    pub fn set(&mut self, j: usize, k: usize, m: usize, l: usize, v: Complex64) {
        let i = self.idx(j, k, m, l);
        self.values[i] = v;
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.values.iter().zip(&o.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|conj(C^{j,k}_{l,m}) - C^{k,j}_{m,l}|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        worst = worst.max((self.get(j, k, l, m).conj() - self.get(k, j, m, l)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Reads the `(1,1)` coefficients of a curvature-like matrix at `z`.
    pub fn from_forms(theta11: &FormMatrix, z: &[Complex64]) -> Self {
        let n = theta11.size();
        let mut c = CurvatureTensor::zero(n);
        for j in 0..n {
            for k in 0..n {
                let mask = (1u16 << j) | (1u16 << (n + k));
                for m in 0..n {
                    for l in 0..n {
                        c.set(j, k, m, l, theta11.coefficient_at(m, l, mask, z));
                    }
                }
            }
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct CurvatureBlocks {
    pub theta20: FormMatrix,
    pub theta11: FormMatrix,
    pub theta02: FormMatrix,
    pub c_origin: CurvatureTensor,
}

impl CurvatureBlocks {
    pub fn at(&self, z: &[Complex64]) -> CurvatureTensor {
        CurvatureTensor::from_forms(&self.theta11, z)
    }
}

pub fn curvature(g: &Geometry, conn: &ConnectionForms) -> Result<CurvatureBlocks> {
    let (a1, a2) = (&conn.aprime, &conn.asecond);
    let theta20 = a1.apply(g, Op::Del)?.add(&a1.wedge(a1)?)?.sub(&a2.apply(g, Op::Theta)?)?;
    let theta11 = a1.apply(g, Op::Delbar)?.add(&a2.apply(g, Op::Del)?)?.add(&a1.wedge(a2)?)?.add(&a2.wedge(a1)?)?;
    let theta02 = a2.apply(g, Op::Delbar)?.add(&a2.wedge(a2)?)?.sub(&a1.apply(g, Op::Thetabar)?)?;
    let c_origin = CurvatureTensor::from_forms(&theta11, &vec![Complex64::new(0.0, 0.0); g.n()]);
    Ok(CurvatureBlocks { theta20, theta11, theta02, c_origin })
}

/// Residual of `Theta = dA + A ^ A` against the sum of the three blocks.
pub fn curvature_block_residual(g: &Geometry, conn: &ConnectionForms, blocks: &CurvatureBlocks) -> Result<f64> {
    let a = conn.total()?;
    let full = a.try_map(|f| g.d(f))?.add(&a.wedge(&a)?)?;
    let sum = blocks.theta20.add(&blocks.theta11)?.add(&blocks.theta02)?;
    Ok(full.distance(&sum))
}

pub fn require_normal_orthonormal(g: &Geometry, hd: &HermitianData) -> Result<()> {
    check_dims(g, hd)?;
    let s = g.structure();
    let v = normal_form_violation(s.b(), s.order().min(2));
    if v > 1e-9 || !s.is_adapted(1e-12) {
        return Err(precondition(format!("coordinates are not normal of order 2 (violation {v:.3e})")));
    }
    if !hd.is_identity_at_origin(1e-12) {
        return Err(precondition("frame is not orthonormal at 0"));
    }
    Ok(())
}

fn origin_formula(g: &Geometry, hd: &HermitianData, with_linear: bool) -> Result<CurvatureTensor> {
    require_normal_orthonormal(g, hd)?;
    let n = g.n();
    let b = J3Families::from_structure(g.structure()).b1;
    let lin: Vec<DMat> = (0..n).map(|p| hd.linear(p)).collect();
    let mut c = CurvatureTensor::zero(n);
    for j in 0..n {
        for k in 0..n {
            let hm = hd.mixed(j, k);
            for m in 0..n {
                for l in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for r in 0..n {
                        if with_linear {
                            s += 4.0 * lin[j][(l, r)] * lin[k][(m, r)].conj();
                        }
                        s += (b[k][(m, r)].conj() - b[r][(m, k)].conj()) * b[j][(r, l)];
                        s += (b[j][(l, r)] - b[r][(l, j)]) * b[k][(r, m)].conj();
                    }
                    c.set(j, k, m, l, -hm[(l, m)] + 0.25 * s);
                }
            }
        }
    }
    Ok(c)
}

/// Closed formula for `C^{j,k}_{m,l}(0)` in normal coordinates with `H(0) = I`:
/// `-H^{j,kbar}_{l,m} + 1/4 sum_r [4 H^j_{l,r} conj(H^k_{m,r}) + (conj B^k_{m,r} - conj B^r_{m,k}) B^j_{r,l}
/// + (B^j_{l,r} - B^r_{l,j}) conj B^k_{r,m}]`.
pub fn curvature_origin_formula(g: &Geometry, hd: &HermitianData) -> Result<CurvatureTensor> {
    origin_formula(g, hd, true)
}

/// The same formula without the product of linear metric terms, as displayed for symplectic metrics.
pub fn curvature_origin_formula_symplectic(g: &Geometry, hd: &HermitianData) -> Result<CurvatureTensor> {
    origin_formula(g, hd, false)
}

/// `(delbar del conj H - delbar conj H ^ del conj H + del A'' - delbar conj(A'')^t)` read at 0.
/// Requires `H(0) = I` and `A''(0) = 0`.
pub fn pointwise_curvature_formula(g: &Geometry, hd: &HermitianData) -> Result<CurvatureTensor> {
    check_dims(g, hd)?;
    let n = g.n();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let a2 = canonical_delbar_connection(g);
    if !hd.is_identity_at_origin(1e-12) || a2.max_abs_at(&zero) > 1e-12 {
        return Err(precondition("needs an orthonormal frame with A''(0) = 0"));
    }
    let hbar = hd.matrix().conj();
    let dh = FormMatrix::differential(g, &hbar, Op::Del)?;
    let dbh = FormMatrix::differential(g, &hbar, Op::Delbar)?;
    let p = dh
        .apply(g, Op::Delbar)?
        .sub(&dbh.wedge(&dh)?)?
        .add(&a2.apply(g, Op::Del)?)?
        .sub(&a2.conj().transpose().apply(g, Op::Delbar)?)?;
    Ok(CurvatureTensor::from_forms(&p, &zero))
}

/// Largest defect of `h(i Theta11(xi, eta) s, t) = conj(h(i Theta11(xi, eta) t, s))` over
/// frame sections and random real `xi, eta` at `z`.
pub fn theta11_hermitian_defect(blocks: &CurvatureBlocks, hd: &HermitianData, z: &[Complex64], seed: u64) -> f64 {
    let n = hd.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = hd.matrix();
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let mut rvec = || -> Vec<Complex64> {
            let v: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            v.iter().copied().chain(v.iter().map(|c| c.conj())).collect()
        };
        let (x, y) = (rvec(), rvec());
        // M_{a,b} = i Theta11_{a,b}(xi, eta), compared as jets before evaluation
        let m = JetMatrix::from_fn(n, n, |a, b| blocks.theta11.get(a, b).pair2_jet(&x, &y).scale(&I));
        for s in 0..n {
            for t in 0..n {
                let mut lhs = Jet::zero(n, h.get(0, 0).order());
                let mut rhs = lhs.clone();
                for a in 0..n {
                    lhs = &lhs + &(m.get(a, s) * h.get(a, t));
                    rhs = &rhs + &(m.get(a, t) * h.get(a, s));
                }
                worst = worst.max(sample_max(&(&lhs - &rhs.conj()), &[z.to_vec()]));
            }
        }
    }
    worst
}

/// `z = 0` and two seeded points of norm 0.05.
pub fn sample_points(n: usize) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pts = vec![vec![Complex64::new(0.0, 0.0); n]];
    for _ in 0..2 {
        let v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        pts.push(v.iter().map(|c| c * (0.05 / norm)).collect());
    }
    pts
}

/// Largest value of a jet at the sample points, after truncation to its trusted degree.
pub(crate) fn sample_max(f: &Jet, pts: &[Vec<Complex64>]) -> f64 {
    let t = f.truncate(f.effective_order());
    pts.iter().map(|p| t.eval(p).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_coords::structure_from_b;
    use crate::structure::{random_deformation, structure_from_deformation, AlmostComplexStructure};

    pub(crate) fn fixb() -> AlmostComplexStructure {
        let mut b = JetMatrix::zeros(2, 2, 2, 4);
        b.set(0, 0, Jet::monomial(2, 4, Mono::new(&[0, 1], &[0, 0]), Complex64::new(0.3, 0.1)).exact());
        structure_from_b(b).unwrap()
    }

    fn ball_metric(n: usize, order: u32) -> HermitianData {
        let mut h = JetMatrix::identity(n, n, order);
        h.set(
            0,
            0,
            Jet::one(n, order) - Jet::monomial(n, order, Mono::new(&unit(n, 0), &unit(n, 0)), Complex64::new(1.0, 0.0)),
        );
        HermitianData::new(h).unwrap()
    }

    #[test]
    fn rejects_non_hermitian_and_indefinite() {
        let mut h = JetMatrix::identity(2, 2, 3);
        h.set(0, 1, Jet::z(2, 3, 0));
        assert!(HermitianData::new(h).is_err());
        let mut h = JetMatrix::identity(2, 2, 3);
        h.set(1, 1, Jet::constant(2, 3, Complex64::new(-1.0, 0.0)));
        assert!(HermitianData::new(h).is_err());
    }

    #[test]
    fn flat_connection_on_j0() {
        let g = Geometry::new(&AlmostComplexStructure::j0(2, 4)).unwrap();
        let conn = chern_connection(&g, &HermitianData::identity(2, 4)).unwrap();
        assert_eq!(conn.total().unwrap().residual(), 0.0);
        let blocks = curvature(&g, &conn).unwrap();
        assert_eq!(blocks.theta11.residual() + blocks.theta20.residual() + blocks.theta02.residual(), 0.0);
    }

    #[test]
    fn ball_metric_connection_and_curvature() {
        let (n, order) = (2, 5);
        let g = Geometry::new(&AlmostComplexStructure::j0(n, order)).unwrap();
        let hd = ball_metric(n, order);
        let conn = chern_connection(&g, &hd).unwrap();
        // -(1 - |z1|^2)^{-1} zbar1 dz1 = -sum_k |z1|^{2k} zbar1 dz1
        let a = conn.aprime.coefficient(0, 0, 1);
        for k in 0..2u32 {
            let m = Mono::new(&[k, 0], &[k + 1, 0]);
            assert!((a.coeff(m) + Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(a.truncate(3).len() == 2);
        let blocks = curvature(&g, &conn).unwrap();
        assert!((blocks.c_origin.get(0, 0, 0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let formula = curvature_origin_formula(&g, &hd).unwrap();
        assert!(formula.distance(&blocks.c_origin) < 1e-14);
        assert!(compatibility_residual(&g, hd.matrix(), &conn).unwrap() < 1e-13);
    }

    #[test]
    fn fixb_curvature_value() {
        let s = fixb();
        let g = Geometry::new(&s).unwrap();
        let hd = HermitianData::identity(2, 4);
        let conn = chern_connection(&g, &hd).unwrap();
        // H = I gives A' = -conj(A'')^t
        assert!(conn.aprime.distance(&conn.asecond.conj().transpose().neg()) < 1e-15);
        let blocks = curvature(&g, &conn).unwrap();
        let c = &blocks.c_origin;
        assert!((c.get(1, 1, 0, 0) - Complex64::new(0.05, 0.0)).norm() < 1e-12);
        for j in 0..2 {
            for k in 0..2 {
                for m in 0..2 {
                    for l in 0..2 {
                        if (j, k, m, l) != (1, 1, 0, 0) {
                            assert!(c.get(j, k, m, l).norm() < 1e-12, "{j}{k}{m}{l}");
                        }
                    }
                }
            }
        }
        assert!(curvature_origin_formula(&g, &hd).unwrap().distance(c) < 1e-12);
        assert!(pointwise_curvature_formula(&g, &hd).unwrap().distance(c) < 1e-12);
        assert!(c.hermitian_defect() < 1e-12);
        assert!(curvature_block_residual(&g, &conn, &blocks).unwrap() < 1e-12);
    }

    fn generic_metric(n: usize, order: u32, seed: u64, linear: bool) -> HermitianData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = JetMatrix::identity(n, n, order);
        let mut mk = |m: Mono| {
            Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)) * if m.degree() > 0 { 1.0 } else { 0.0 }
        };
        for l in 0..n {
            for k in l..n {
                let mut f = Jet::zero(n, order);
                for m in Mono::all(n, 2) {
                    if m.degree() == 0 || (m.degree() == 1 && !linear) {
                        continue;
                    }
                    f.add_term(m, mk(m));
                }
                if l == k {
                    f = (&f + &f.conj()).scale(&Complex64::new(0.5, 0.0));
                    f = &f + &Jet::one(n, order);
                }
                h.set(l, k, f.clone());
                if l != k {
                    h.set(k, l, f.conj());
                }
            }
        }
        HermitianData::new(h).unwrap()
    }

    #[test]
    fn origin_formula_matches_on_random_normal_structures() {
        use crate::normal_coords::normalize_to_order;
        for seed in 0..3u64 {
            let s0 = structure_from_deformation(&random_deformation(2, 4, 40 + seed)).unwrap();
            let s = normalize_to_order(&s0, 3).unwrap().structure;
            let g = Geometry::new(&s).unwrap();
            let hd = generic_metric(2, 4, seed, true);
            let blocks = curvature(&g, &chern_connection(&g, &hd).unwrap()).unwrap();
            let formula = curvature_origin_formula(&g, &hd).unwrap();
            let d = formula.distance(&blocks.c_origin);
            assert!(d < 1e-11, "seed {seed}: {d:.3e}");
            assert!(blocks.c_origin.hermitian_defect() < 1e-11);
            let z = &sample_points(2)[1];
            let hdef = theta11_hermitian_defect(&blocks, &hd, z, seed);
            assert!(hdef < 1e-10, "seed {seed}: {hdef:.3e}");
        }
    }

    #[test]
    fn pointwise_formula_on_integrable_and_nonintegrable() {
        let g = Geometry::new(&fixb()).unwrap();
        let hd = generic_metric(2, 4, 9, true);
        let blocks = curvature(&g, &chern_connection(&g, &hd).unwrap()).unwrap();
        assert!(pointwise_curvature_formula(&g, &hd).unwrap().distance(&blocks.c_origin) < 1e-10);
    }

    #[test]
    fn theta02_vanishes_with_vanishing_torsion_one_jet() {
        // B = c z_2^3 has vanishing torsion 1-jet
        let mut b = JetMatrix::zeros(2, 2, 2, 5);
        b.set(0, 0, Jet::monomial(2, 5, Mono::new(&[0, 3], &[0, 0]), Complex64::new(0.2, 0.1)));
        let s = structure_from_b(b).unwrap();
        let g = Geometry::new(&s).unwrap();
        let hd = generic_metric(2, 5, 3, true);
        let blocks = curvature(&g, &chern_connection(&g, &hd).unwrap()).unwrap();
        assert!(blocks.theta02.max_abs_at(&[Complex64::new(0.0, 0.0); 2]) < 1e-12);
    }
}
