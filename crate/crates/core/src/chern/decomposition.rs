use super::levi_civita::{chern_coordinate_matrix, reality_defect};
use super::{chern_connection, levi_civita, sample_max, sample_points, HermitianData, I};
use crate::error::Result;
use crate::forms::Geometry;
use crate::jet::Jet;
use num_complex::Complex64;

/// A `(1,2)`-tensor on the complexified tangent space in the frame `(zeta, zetabar)`:
/// `T(e_a, e_b) = sum_c T^c_{ab} e_c`.
#[derive(Clone, Debug)]
pub struct FrameTensor {
    n: usize,
    t: Vec<Jet>,
}

impl FrameTensor {
    pub fn zero(n: usize, order: u32) -> Self {
        FrameTensor { n, t: vec![Jet::zero(n, order); 8 * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Jet) -> Self {
        let d = 2 * n;
        let mut t = Vec::with_capacity(d * d * d);
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    t.push(f(c, a, b));
                }
            }
        }
        FrameTensor { n, t }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> &Jet {
        let d = 2 * self.n;
        &self.t[(c * d + a) * d + b]
    }

    pub fn add(&self, o: &Self) -> Self {
        FrameTensor { n: self.n, t: self.t.iter().zip(&o.t).map(|(a, b)| a + b).collect() }
    }

    pub fn residual(&self) -> f64 {
        self.t.iter().map(|j| j.residual()).fold(0.0, f64::max)
    }

    /// Largest value at the sample points.
    pub fn sample_max(&self) -> f64 {
        let pts = sample_points(self.n);
        self.t.iter().map(|j| sample_max(j, &pts)).fold(0.0, f64::max)
    }

    /// Largest defect of `T^{sigma c}_{sigma a, sigma b} = conj(T^c_{ab})`, i.e. of `T` being real.
    pub fn reality_defect(&self) -> f64 {
        let n = self.n;
        let sw = |i: usize| if i < n { i + n } else { i - n };
        let d = 2 * n;
        let mut worst: f64 = 0.0;
        for c in 0..d {
            for a in 0..d {
                for b in 0..d {
                    worst = worst.max(self.get(sw(c), sw(a), sw(b)).distance(&self.get(c, a, b).conj()));
                }
            }
        }
        worst
    }
}

fn j_factor(n: usize, a: usize) -> Complex64 {
    if a < n {
        I
    } else {
        -I
    }
}

#[derive(Clone, Debug)]
pub struct ChernLCDecomposition {
    pub gamma20: FrameTensor,
    pub gamma11: FrameTensor,
    pub gamma02: FrameTensor,
    pub delta: FrameTensor,
    pub tau: FrameTensor,
    pub n_omega: FrameTensor,
    /// Largest coefficient of `d omega`.
    pub domega_max: f64,
    /// Largest deviation in `D_a e_b - nabla_a e_b - delta(e_a, e_b) + N(e_a, e_b)` at the sample points.
    pub residual: f64,
    /// Largest deviation in `T_D(e_a, e_b) - [gamma20 + gamma02](e_a, e_b) + N(e_a, e_b) - N(e_b, e_a)`,
    /// the torsion identity implied by the decomposition.
    pub torsion_residual: f64,
    /// Same with `+[gamma20 + gamma02]`: the opposite sign on the `gamma` term.
    pub torsion_residual_flipped: f64,
    /// Largest defect of the coordinate Chern matrix being the complexification of a real connection.
    pub block_reality_defect: f64,
}

impl ChernLCDecomposition {
    pub fn delta_max(&self) -> f64 {
        self.delta.sample_max()
    }

    pub fn n_omega_max(&self) -> f64 {
        self.n_omega.sample_max()
    }

    pub fn gamma02_max(&self) -> f64 {
        self.gamma02.sample_max()
    }
}

pub fn chern_lc_decomposition(geo: &Geometry, hd: &HermitianData) -> Result<ChernLCDecomposition> {
    let n = geo.n();
    let d = 2 * n;
    let order = geo.order();
    let h = hd.matrix();
    let hinv = h.inverse()?;
    let omega = hd.omega(geo)?;
    let domega = geo.d(&omega)?;
    let domega_max = domega.residual();

    // omega(gamma(e_a, e_b), e_d) = d omega(e_a, e_b, e_d)
    let two_i = Complex64::new(0.0, 2.0);
    let mut gamma = FrameTensor::zero(n, order);
    for a in 0..d {
        for b in 0..d {
            let rhs: Vec<Jet> = (0..d).map(|e| domega.value_on(&[a, b, e])).collect();
            for c in 0..n {
                // (i/2) sum_c gamma^c h_{c,m} = rhs_{n+m};  -(i/2) sum_c h_{m,c} gamma^{n+c} = rhs_m
                let mut up = Jet::zero(n, order);
                let mut down = Jet::zero(n, order);
                for m in 0..n {
                    up = &up + &(hinv.get(m, c) * &rhs[n + m]);
                    down = &down + &(hinv.get(c, m) * &rhs[m]);
                }
                let i = (c * d + a) * d + b;
                gamma.t[i] = up.scale(&-two_i);
                gamma.t[((n + c) * d + a) * d + b] = down.scale(&two_i);
            }
        }
    }
    let pick = |f: &dyn Fn(usize, usize, usize) -> bool| {
        FrameTensor::from_fn(n, |c, a, b| if f(c, a, b) { gamma.get(c, a, b).clone() } else { Jet::zero(n, order) })
    };
    let hol = |x: usize| x < n;
    let gamma20 = pick(&|c, a, b| (hol(c) && hol(a) && hol(b)) || (!hol(c) && !hol(a) && !hol(b)));
    let gamma02 = pick(&|c, a, b| hol(a) == hol(b) && hol(c) != hol(a));
    let gamma11 = pick(&|_, a, b| hol(a) != hol(b));
    let delta = FrameTensor::from_fn(n, |c, a, b| {
        let s = gamma20.get(c, a, b) + gamma02.get(c, a, b);
        let t = gamma11.get(c, a, b).scale(&(j_factor(n, c) * j_factor(n, b)));
        (&s + &t).scale(&Complex64::new(0.5, 0.0))
    });

    // omega(tau(zetabar_a, zetabar_b), zetabar_m) = omega(zetabar_a, [zetabar_b, zetabar_m]^{1,0})
    let bc = geo.brackets();
    let mut tau = FrameTensor::zero(n, order);
    for a in 0..n {
        for b in 0..n {
            let r: Vec<Jet> = (0..n)
                .map(|m| {
                    let mut acc = Jet::zero(n, order);
                    for k in 0..n {
                        acc = &acc - &(&bc.nn[k][b][m] * h.get(k, a));
                    }
                    acc
                })
                .collect();
            for c in 0..n {
                let mut x = Jet::zero(n, order);
                for m in 0..n {
                    x = &x + &(hinv.get(m, c) * &r[m]);
                }
                tau.t[(c * d + n + a) * d + n + b] = x;
            }
        }
    }
    let tau_bar = FrameTensor::from_fn(n, |c, a, b| {
        if c >= n && a < n && b < n {
            tau.get(c - n, a + n, b + n).conj()
        } else {
            Jet::zero(n, order)
        }
    });
    let n_omega = tau.add(&tau_bar);

    let conn = chern_connection(geo, hd)?;
    let a = conn.total()?;
    let coord = chern_coordinate_matrix(geo, &conn)?;
    let block_reality_defect = reality_defect(&coord);
    let chern = FrameTensor::from_fn(n, |c, e, b| match (c < n, b < n) {
        (true, true) => a.coefficient(c, b, 1 << e),
        (false, false) => a.get(c - n, b - n).conj().coeff(1 << e).cloned().unwrap_or_else(|| Jet::zero(n, order)),
        _ => Jet::zero(n, order),
    });
    let lc = levi_civita(geo, hd)?;
    let frame = geo.frame();
    let mut nabla = FrameTensor::zero(n, order);
    for e in 0..d {
        for b in 0..d {
            let v = frame.coefficients(&lc.covariant(&frame.field(e), &frame.field(b)));
            for (c, x) in v.into_iter().enumerate() {
                nabla.t[(c * d + e) * d + b] = x;
            }
        }
    }

    let pts = sample_points(n);
    let mut residual: f64 = 0.0;
    let mut torsion_residual: f64 = 0.0;
    let mut torsion_residual_flipped: f64 = 0.0;
    for c in 0..d {
        for e in 0..d {
            for b in 0..d {
                let lhs = &(&(chern.get(c, e, b) - nabla.get(c, e, b)) - delta.get(c, e, b)) + n_omega.get(c, e, b);
                residual = residual.max(sample_max(&lhs, &pts));
            }
        }
    }
    for e in 0..d {
        for b in 0..d {
            let br = frame.coefficients(&frame.bracket(e, b));
            for c in 0..d {
                let t = &(chern.get(c, e, b) - chern.get(c, b, e)) - &br[c];
                let g = gamma20.get(c, e, b) + gamma02.get(c, e, b);
                let nn = &(-n_omega.get(c, e, b)) + n_omega.get(c, b, e);
                torsion_residual = torsion_residual.max(sample_max(&(&t - &(&g + &nn)), &pts));
                torsion_residual_flipped = torsion_residual_flipped.max(sample_max(&(&t - &(&nn - &g)), &pts));
            }
        }
    }
    Ok(ChernLCDecomposition {
        gamma20,
        gamma11,
        gamma02,
        delta,
        tau,
        n_omega,
        domega_max,
        residual,
        torsion_residual,
        torsion_residual_flipped,
        block_reality_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::fixb;
    use super::*;
    use crate::jet::JetMatrix;
    use crate::structure::{random_deformation, structure_from_deformation, AlmostComplexStructure};

    fn nonclosed(order: u32) -> HermitianData {
        // z_2 coefficient 0.2 in h_{1,2}
        let mut h = JetMatrix::identity(2, 2, order);
        h.set(0, 1, Jet::z(2, order, 1).scale(&Complex64::new(0.2, 0.0)));
        h.set(1, 0, h.get(0, 1).conj());
        HermitianData::new(h).unwrap()
    }

    #[test]
    fn kahler_flat_case() {
        let geo = Geometry::new(&AlmostComplexStructure::j0(2, 4)).unwrap();
        let dec = chern_lc_decomposition(&geo, &HermitianData::identity(2, 4)).unwrap();
        assert_eq!(dec.delta.residual(), 0.0);
        assert_eq!(dec.n_omega.residual(), 0.0);
        assert!(dec.residual < 1e-12);
    }

    #[test]
    fn nonclosed_metric_on_j0() {
        let geo = Geometry::new(&AlmostComplexStructure::j0(2, 4)).unwrap();
        let dec = chern_lc_decomposition(&geo, &nonclosed(4)).unwrap();
        assert!(dec.domega_max > 0.05);
        assert_eq!(dec.n_omega.residual(), 0.0);
        assert!(dec.delta_max() > 0.01);
        assert!(dec.residual < 1e-10, "{}", dec.residual);
        assert!(dec.torsion_residual < 1e-10, "{}", dec.torsion_residual);
        // gamma20 is nonzero here, so the flipped sign cannot hold
        assert!(dec.torsion_residual_flipped > 1e-3);
        assert!(dec.gamma02_max() < 1e-14);
        assert!(dec.delta.reality_defect() < 1e-13);
    }

    #[test]
    fn closed_metric_has_no_delta() {
        // h_{1,2} = 0.2 z_1 comes from a Kahler potential, hence d omega = 0
        let mut h = JetMatrix::identity(2, 2, 4);
        h.set(0, 1, Jet::z(2, 4, 0).scale(&Complex64::new(0.2, 0.0)));
        h.set(1, 0, h.get(0, 1).conj());
        let geo = Geometry::new(&AlmostComplexStructure::j0(2, 4)).unwrap();
        let dec = chern_lc_decomposition(&geo, &HermitianData::new(h).unwrap()).unwrap();
        assert!(dec.domega_max < 1e-15);
        assert!(dec.delta.residual() < 1e-15);
        assert!(dec.residual < 1e-12);
    }

    #[test]
    fn fixb_decomposition() {
        let geo = Geometry::new(&fixb()).unwrap();
        let dec = chern_lc_decomposition(&geo, &HermitianData::identity(2, 4)).unwrap();
        assert!(dec.residual < 1e-10, "{}", dec.residual);
        assert!(dec.torsion_residual < 1e-10, "{}", dec.torsion_residual);
        assert!(dec.n_omega_max() > 0.01);
        assert!(dec.n_omega.reality_defect() < 1e-13);
        assert!(dec.block_reality_defect < 1e-13);
    }

    #[test]
    fn random_structure_and_metric() {
        let s = structure_from_deformation(&random_deformation(2, 4, 5)).unwrap();
        let geo = Geometry::new(&s).unwrap();
        let dec = chern_lc_decomposition(&geo, &nonclosed(4)).unwrap();
        assert!(dec.residual < 1e-10, "{}", dec.residual);
        assert!(dec.torsion_residual < 1e-10, "{}", dec.torsion_residual);
    }
}
