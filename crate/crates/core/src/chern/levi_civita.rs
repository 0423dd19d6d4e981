use super::{ConnectionForms, HermitianData};
use crate::error::{precondition, Result};
use crate::forms::{Basis, Form, FormMatrix, Geometry};
use crate::jet::{Jet, JetMatrix};
use crate::structure::VectorField;
use num_complex::Complex64;

/// Connection coefficients in the complexified coordinate basis `(d/dz, d/dzbar)`:
/// `nabla_{d_a} d_b = sum_c gamma^c_{ab} d_c`.
#[derive(Clone, Debug)]
pub struct CoordinateConnection {
    n: usize,
    gamma: Vec<Jet>,
}

impl CoordinateConnection {
    fn new(n: usize, gamma: Vec<Jet>) -> Self {
        CoordinateConnection { n, gamma }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: usize, a: usize, b: usize) -> &Jet {
        let d = 2 * self.n;
        &self.gamma[(c * d + a) * d + b]
    }

    /// `(nabla_X Y)^c = X(Y^c) + sum X^a gamma^c_{ab} Y^b`.
    pub fn covariant(&self, x: &VectorField, y: &VectorField) -> VectorField {
        let d = 2 * self.n;
        let comps = (0..d)
            .map(|c| {
                let mut acc = x.apply(y.comp(c));
                for a in 0..d {
                    for b in 0..d {
                        let g = self.get(c, a, b);
                        if !g.is_zero() {
                            acc = &acc + &(&(x.comp(a) * g) * y.comp(b));
                        }
                    }
                }
                acc
            })
            .collect();
        VectorField::new(comps).expect("matching dimensions")
    }

    /// `nabla_X Y - nabla_Y X - [X, Y]`.
    pub fn torsion(&self, x: &VectorField, y: &VectorField) -> VectorField {
        self.covariant(x, y).sub(&self.covariant(y, x)).sub(&x.bracket(y))
    }

    /// Geodesic acceleration `-gamma^c_{ab}(z) w^a w^b` for `c < n`, `w = (v, conj v)`.
    pub fn acceleration(&self, z: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let w: Vec<Complex64> = v.iter().copied().chain(v.iter().map(|c| c.conj())).collect();
        (0..n)
            .map(|c| {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..2 * n {
                    for b in 0..2 * n {
                        let g = self.get(c, a, b);
                        if !g.is_zero() {
                            acc -= g.eval(z) * w[a] * w[b];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Coefficients truncated to their trusted degree, for pointwise evaluation.
    pub fn trusted(&self) -> Self {
        CoordinateConnection::new(self.n, self.gamma.iter().map(|g| g.truncate(g.effective_order())).collect())
    }

    pub fn max_residual(&self) -> f64 {
        self.gamma.iter().map(|g| g.residual()).fold(0.0, f64::max)
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.gamma.iter().zip(&o.gamma).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

/// `g = omega(., J.)` in the complexified coordinate basis, with
/// `omega = (i/2) sum h_{l,m} zeta*_l ^ zetabar*_m`.
pub fn metric_tensor(geo: &Geometry, hd: &HermitianData) -> JetMatrix {
    let n = geo.n();
    let order = geo.order();
    let half = Complex64::new(0.5, 0.0);
    // g(zeta_l, zetabar_m) = g(zetabar_m, zeta_l) = h_{l,m} / 2
    let gf = JetMatrix::from_fn(2 * n, 2 * n, |a, b| match (a < n, b < n) {
        (true, false) => hd.matrix().get(a, b - n).scale(&half),
        (false, true) => hd.matrix().get(b, a - n).scale(&half),
        _ => Jet::zero(n, order),
    });
    let dual = geo.frame().dual();
    dual.transpose().mul(&gf).mul(dual)
}

pub fn levi_civita(geo: &Geometry, hd: &HermitianData) -> Result<CoordinateConnection> {
    let n = geo.n();
    let d = 2 * n;
    let g = metric_tensor(geo, hd);
    let ginv = g.inverse().map_err(|_| precondition("metric g is degenerate at 0"))?;
    let dg: Vec<JetMatrix> = (0..d).map(|a| g.map(|e| e.partial(a))).collect();
    let mut gamma = Vec::with_capacity(d * d * d);
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut acc = Jet::zero(n, geo.order());
                for e in 0..d {
                    let k = ginv.get(c, e);
                    if k.is_zero() {
                        continue;
                    }
                    let t = &(dg[a].get(e, b) + dg[b].get(e, a)) - dg[e].get(a, b);
                    acc = &acc + &(k * &t);
                }
                gamma.push(acc.scale(&Complex64::new(0.5, 0.0)));
            }
        }
    }
    Ok(CoordinateConnection::new(n, gamma))
}

/// Coordinate connection matrix `A_d = (F A_frame - dF) F^{-1}` of the complexified
/// connection `diag(A, conj A)` on the frame `F = (zeta, zetabar)`.
pub fn chern_coordinate_matrix(geo: &Geometry, conn: &ConnectionForms) -> Result<FormMatrix> {
    let n = geo.n();
    let d = 2 * n;
    let a = conn.total()?;
    let abar = a.conj();
    let zero = Form::zero(n, geo.order(), Basis::Coordinate);
    let mut full = FormMatrix::zero(d, n, geo.order(), Basis::Coordinate);
    for i in 0..d {
        for j in 0..d {
            let f = match (i < n, j < n) {
                (true, true) => geo.to_coordinate(a.get(i, j))?,
                (false, false) => geo.to_coordinate(abar.get(i - n, j - n))?,
                _ => zero.clone(),
            };
            full.set(i, j, f);
        }
    }
    let fm = geo.frame().matrix();
    let df = FormMatrix::from_fn(d, |i, j| {
        let mut f = zero.clone();
        for v in 0..d {
            let c = fm.get(i, j).partial(v);
            if !c.is_zero() {
                f = f.try_add(&Form::monomial(&[v], c, Basis::Coordinate).expect("generator")).expect("same basis");
            }
        }
        f
    });
    full.left(fm)?.sub(&df)?.right(geo.frame().dual())
}

/// Christoffel symbols of the Chern connection: `gamma^c_{ab}` is the `dx_a` coefficient of `(A_d)_{c,b}`.
pub fn chern_coordinate_connection(geo: &Geometry, conn: &ConnectionForms) -> Result<CoordinateConnection> {
    let n = geo.n();
    let d = 2 * n;
    let m = chern_coordinate_matrix(geo, conn)?;
    let mut gamma = Vec::with_capacity(d * d * d);
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                gamma.push(m.coefficient(c, b, 1 << a));
            }
        }
    }
    Ok(CoordinateConnection::new(n, gamma))
}

/// Largest defect of `A_d(sigma c, sigma b) = conj(A_d(c, b))` with `sigma` swapping `z` and `zbar` slots:
/// the coordinate matrix of a complexified real connection.
pub fn reality_defect(m: &FormMatrix) -> f64 {
    let d = m.size();
    let n = d / 2;
    let sw = |i: usize| if i < n { i + n } else { i - n };
    let mut worst: f64 = 0.0;
    for c in 0..d {
        for b in 0..d {
            worst = worst.max(m.get(sw(c), sw(b)).distance(&m.get(c, b).conj()));
        }
    }
    worst
}
