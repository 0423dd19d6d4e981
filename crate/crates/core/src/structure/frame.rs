//! The (1,0)-frame `zeta_k = (d/dz_k)^{1,0}`, its dual, Lie brackets and torsion.

use super::AlmostComplexStructure;
use crate::error::{structural, Result};
use crate::jet::{Jet, JetMatrix};
use num_complex::Complex64;

/// A complexified vector field: components on `d/dz_1..d/dz_n, d/dzbar_1..d/dzbar_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<Jet>,
}

impl VectorField {
    pub fn new(comps: Vec<Jet>) -> Result<Self> {
        let n = comps.len() / 2;
        if comps.len() != 2 * n || n == 0 {
            return Err(structural("vector field needs 2n components"));
        }
        if comps.iter().any(|c| c.n() != n) {
            return Err(structural("vector field components must be jets in n variables"));
        }
        Ok(VectorField { comps })
    }

    /// A real field: the `d/dzbar` components must conjugate the `d/dz` ones.
    pub fn real(comps: Vec<Jet>, tol: f64) -> Result<Self> {
        let v = Self::new(comps)?;
        if v.reality_defect() > tol {
            return Err(structural("vector field violates the conjugate-pair constraint"));
        }
        Ok(v)
    }

    /// Coordinate field `d/dz_a` (`a < n`) or `d/dzbar_{a-n}`.
    pub fn coordinate(n: usize, order: u32, a: usize) -> Self {
        let comps = (0..2 * n).map(|c| if c == a { Jet::one(n, order) } else { Jet::zero(n, order) }).collect();
        VectorField { comps }
    }

    pub fn n(&self) -> usize {
        self.comps.len() / 2
    }

    pub fn comps(&self) -> &[Jet] {
        &self.comps
    }

    pub fn comp(&self, a: usize) -> &Jet {
        &self.comps[a]
    }

    pub fn reality_defect(&self) -> f64 {
        let n = self.n();
        (0..n).map(|k| self.comps[n + k].distance(&self.comps[k].conj())).fold(0.0, f64::max)
    }

    /// Complex conjugate field.
    pub fn conj(&self) -> Self {
        let n = self.n();
        let comps = (0..2 * n).map(|a| self.comps[(a + n) % (2 * n)].conj()).collect();
        VectorField { comps }
    }

    /// Directional derivative `X . f`.
    pub fn apply(&self, f: &Jet) -> Jet {
        let mut out = Jet::zero(f.n(), f.order()).with_effective_order(f.effective_order() - 1);
        for (a, x) in self.comps.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            out.add_assign_ref(&(x * &f.partial(a)));
        }
        out
    }

    /// `[X, Y]^c = X . Y^c - Y . X^c`.
    pub fn bracket(&self, other: &Self) -> Self {
        let comps =
            (0..self.comps.len()).map(|c| &self.apply(&other.comps[c]) - &other.apply(&self.comps[c])).collect();
        VectorField { comps }
    }

    pub fn scale_jet(&self, f: &Jet) -> Self {
        VectorField { comps: self.comps.iter().map(|c| c * f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        VectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        VectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect() }
    }

    /// `M . X` for a `2n x 2n` jet matrix acting on components.
    pub fn transform(&self, m: &JetMatrix) -> Self {
        let comps = (0..m.rows())
            .map(|r| {
                let mut s = Jet::zero(self.comps[0].n(), self.comps[0].order());
                for (c, x) in self.comps.iter().enumerate() {
                    s.add_assign_ref(&(m.get(r, c) * x));
                }
                s
            })
            .collect();
        VectorField { comps }
    }

    pub fn residual(&self) -> f64 {
        self.comps.iter().map(|c| c.residual()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.eval(z)).collect()
    }
}

/// Frame matrix `F` (columns `zeta_1..n, zetabar_1..n` on `d/dz, d/dzbar`),
/// its inverse (rows `zeta*_k, zetabar*_k` on `dz, dzbar`) and cached partials.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    f: JetMatrix,
    dual: JetMatrix,
    df: Vec<JetMatrix>,
}

impl Frame {
    /// `zeta_k = 1/2 (I - iA)_{.k} d/dz - i/2 B_{.k} d/dzbar`.
    pub fn new(s: &AlmostComplexStructure) -> Result<Self> {
        let n = s.n();
        let order = s.order();
        let half = Complex64::new(0.5, 0.0);
        let ih = Complex64::new(0.0, 0.5);
        let id = JetMatrix::identity(n, n, order);
        let a = s.a();
        let b = s.b();
        let top_l = id.scale(&half).sub(&a.scale(&ih));
        let bot_l = b.scale(&-ih);
        let top_r = b.conj().scale(&ih);
        let bot_r = id.scale(&half).add(&a.conj().scale(&ih));
        let f = JetMatrix::from_blocks(&top_l, &top_r, &bot_l, &bot_r);
        let dual = f.inverse().map_err(|e| structural(format!("frame matrix is singular at the origin: {e}")))?;
        let df = (0..2 * n).map(|v| f.map(|e| e.partial(v))).collect();
        Ok(Frame { n, f, dual, df })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.f.order()
    }

    pub fn matrix(&self) -> &JetMatrix {
        &self.f
    }

    pub fn dual(&self) -> &JetMatrix {
        &self.dual
    }

    /// Partial derivative of the frame matrix along real variable `v`.
    pub fn matrix_partial(&self, v: usize) -> &JetMatrix {
        &self.df[v]
    }

    /// Column `col` of `F` as a field (`col < n`: `zeta`, else `zetabar`).
    pub fn field(&self, col: usize) -> VectorField {
        VectorField { comps: (0..2 * self.n).map(|a| self.f.get(a, col).clone()).collect() }
    }

    pub fn zeta(&self, k: usize) -> VectorField {
        self.field(k)
    }

    pub fn zetabar(&self, k: usize) -> VectorField {
        self.field(self.n + k)
    }

    /// Components of `zeta*_k` (`row < n`) or `zetabar*_{row-n}` on `dz, dzbar`.
    pub fn dual_row(&self, row: usize) -> Vec<Jet> {
        (0..2 * self.n).map(|a| self.dual.get(row, a).clone()).collect()
    }

    /// `X_col . f` for a frame field.
    pub fn derive(&self, col: usize, f: &Jet) -> Jet {
        let mut out = Jet::zero(f.n(), f.order()).with_effective_order(f.effective_order() - 1);
        for a in 0..2 * self.n {
            let x = self.f.get(a, col);
            if x.is_zero() {
                continue;
            }
            out.add_assign_ref(&(x * &f.partial(a)));
        }
        out
    }

    /// Bracket of two frame fields, using the cached partials.
    pub fn bracket(&self, i: usize, j: usize) -> VectorField {
        let n2 = 2 * self.n;
        let comps = (0..n2)
            .map(|c| {
                let mut s = Jet::zero(self.n, self.order()).with_effective_order(self.f.effective_order() - 1);
                for a in 0..n2 {
                    let (xi, xj) = (self.f.get(a, i), self.f.get(a, j));
                    if !xi.is_zero() {
                        s.add_assign_ref(&(xi * self.df[a].get(c, j)));
                    }
                    if !xj.is_zero() {
                        s.add_assign_ref(&-(xj * self.df[a].get(c, i)));
                    }
                }
                s
            })
            .collect();
        VectorField { comps }
    }

    /// Frame coefficients `<e*_row, X>` of a field, for all `2n` rows.
    pub fn coefficients(&self, x: &VectorField) -> Vec<Jet> {
        (0..2 * self.n)
            .map(|r| {
                let mut s = Jet::zero(self.n, self.order());
                for a in 0..2 * self.n {
                    s.add_assign_ref(&(self.dual.get(r, a) * x.comp(a)));
                }
                s
            })
            .collect()
    }

    /// `(X^{1,0}, X^{0,1})` through the dual pairing.
    pub fn split(&self, x: &VectorField) -> (VectorField, VectorField) {
        let c = self.coefficients(x);
        let n = self.n;
        let combine = |range: std::ops::Range<usize>| {
            let comps = (0..2 * n)
                .map(|a| {
                    let mut s = Jet::zero(n, self.order());
                    for r in range.clone() {
                        s.add_assign_ref(&(self.f.get(a, r) * &c[r]));
                    }
                    s
                })
                .collect();
            VectorField { comps }
        };
        (combine(0..n), combine(n..2 * n))
    }

    /// `<e*, e>` which must be the identity.
    pub fn pairing(&self) -> JetMatrix {
        self.dual.mul(&self.f)
    }
}

/// Bracket coefficients in the frame:
/// `[zeta_j, zeta_r] = sum conj(M)^k_jr zeta_k + conj(N)^k_jr zetabar_k`,
/// `[zeta_j, zetabar_r] = sum U^k_jr zeta_k + V^k_jr zetabar_k`.
/// All families are indexed `[k][j][r]`.
#[derive(Clone, Debug)]
pub struct BracketCoefficients {
    pub m: Vec<Vec<Vec<Jet>>>,
    pub mbar: Vec<Vec<Vec<Jet>>>,
    pub nn: Vec<Vec<Vec<Jet>>>,
    pub nbar: Vec<Vec<Vec<Jet>>>,
    pub u: Vec<Vec<Vec<Jet>>>,
    pub ubar: Vec<Vec<Vec<Jet>>>,
    pub v: Vec<Vec<Vec<Jet>>>,
}

fn conj3(x: &[Vec<Vec<Jet>>]) -> Vec<Vec<Vec<Jet>>> {
    x.iter().map(|a| a.iter().map(|b| b.iter().map(|c| c.conj()).collect()).collect()).collect()
}

impl BracketCoefficients {
    pub fn new(frame: &Frame) -> Self {
        let n = frame.n();
        let order = frame.order();
        let eff = frame.matrix().effective_order() - 1;
        let zero = Jet::zero(n, order).with_effective_order(eff);
        let mut mbar = vec![vec![vec![zero.clone(); n]; n]; n];
        let mut nbar = mbar.clone();
        for j in 0..n {
            for r in j + 1..n {
                let c = frame.coefficients(&frame.bracket(j, r));
                for k in 0..n {
                    mbar[k][r][j] = -&c[k];
                    mbar[k][j][r] = c[k].clone();
                    nbar[k][r][j] = -&c[n + k];
                    nbar[k][j][r] = c[n + k].clone();
                }
            }
        }
        let mut u = vec![vec![vec![zero.clone(); n]; n]; n];
        let mut v = u.clone();
        for j in 0..n {
            for r in 0..n {
                let c = frame.coefficients(&frame.bracket(j, n + r));
                for k in 0..n {
                    u[k][j][r] = c[k].clone();
                    v[k][j][r] = c[n + k].clone();
                }
            }
        }
        BracketCoefficients { m: conj3(&mbar), mbar, nn: conj3(&nbar), nbar, ubar: conj3(&u), u, v }
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// Largest violation of `M^k_jr = -M^k_rj`, `N^k_jr = -N^k_rj`, `V^k_jr = -conj(U)^k_rj`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                for r in 0..n {
                    worst = worst
                        .max((&self.m[k][j][r] + &self.m[k][r][j]).residual())
                        .max((&self.nn[k][j][r] + &self.nn[k][r][j]).residual())
                        .max((&self.v[k][j][r] + &self.ubar[k][r][j]).residual());
                }
            }
        }
        worst
    }

    pub fn max_torsion(&self) -> f64 {
        self.nbar.iter().flatten().flatten().map(|j| j.residual()).fold(0.0, f64::max)
    }
}

/// `tau_J = sum_{k<l} conj(N)^r_kl zeta*_k ^ zeta*_l (x) zetabar_r`.
#[derive(Clone, Debug)]
pub struct TorsionTensor {
    /// `[r][k][l]`, antisymmetric in `(k, l)`.
    pub nbar: Vec<Vec<Vec<Jet>>>,
}

impl TorsionTensor {
    pub fn component(&self, r: usize, k: usize, l: usize) -> &Jet {
        &self.nbar[r][k][l]
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.nbar.iter().flatten().flatten().all(|j| j.residual() <= tol)
    }

    /// `tau(X, Y)` as a complexified field.
    pub fn apply(&self, frame: &Frame, x: &VectorField, y: &VectorField) -> VectorField {
        let n = frame.n();
        let cx = frame.coefficients(x);
        let cy = frame.coefficients(y);
        let mut comps = vec![Jet::zero(n, frame.order()); 2 * n];
        for r in 0..n {
            let mut coef = Jet::zero(n, frame.order());
            for k in 0..n {
                for l in 0..n {
                    if k != l && !self.nbar[r][k][l].is_zero() {
                        coef.add_assign_ref(&(&(&cx[k] * &cy[l]) * &self.nbar[r][k][l]));
                    }
                }
            }
            for (a, c) in comps.iter_mut().enumerate() {
                c.add_assign_ref(&(&coef * frame.matrix().get(a, n + r)));
            }
        }
        VectorField { comps }
    }
}

pub fn torsion_tensor(bc: &BracketCoefficients) -> TorsionTensor {
    TorsionTensor { nbar: bc.nbar.clone() }
}

/// Compares `4 N_J(d_a, d_b) = J d_a(J e_b) - J d_b(J e_a) - [J e_a, J e_b]`
/// against `4 (tau + conj tau)(d_a, d_b)` over all coordinate pairs; returns
/// the largest coefficient deviation.
pub fn nijenhuis_check(s: &AlmostComplexStructure, frame: &Frame, bc: &BracketCoefficients) -> f64 {
    let n = s.n();
    let order = s.order();
    let m = s.matrix();
    let tau = torsion_tensor(bc);
    let four = Complex64::new(4.0, 0.0);
    let col = |a: usize| VectorField { comps: (0..2 * n).map(|c| m.get(c, a).clone()).collect() };
    let dcol = |a: usize, v: usize| VectorField { comps: (0..2 * n).map(|c| m.get(c, a).partial(v)).collect() };
    let mut worst: f64 = 0.0;
    for a in 0..2 * n {
        for b in a + 1..2 * n {
            let lhs = dcol(b, a).sub(&dcol(a, b)).transform(&m).sub(&col(a).bracket(&col(b)));
            let (ea, eb) = (VectorField::coordinate(n, order, a), VectorField::coordinate(n, order, b));
            let t = tau.apply(frame, &ea, &eb);
            let rhs = t.add(&t_conj(frame, &tau, &ea, &eb));
            let rhs = VectorField { comps: rhs.comps.iter().map(|c| c.scale(&four)).collect() };
            worst = worst.max(lhs.sub(&rhs).residual());
        }
    }
    worst
}

/// `conj(tau)(X, Y) = sum N^r_kl zetabar*_k(X) zetabar*_l(Y) zeta_r`.
fn t_conj(frame: &Frame, tau: &TorsionTensor, x: &VectorField, y: &VectorField) -> VectorField {
    let n = frame.n();
    let cx = frame.coefficients(x);
    let cy = frame.coefficients(y);
    let mut comps = vec![Jet::zero(n, frame.order()); 2 * n];
    for r in 0..n {
        let mut coef = Jet::zero(n, frame.order());
        for k in 0..n {
            for l in 0..n {
                let c = &tau.nbar[r][k][l];
                if k != l && !c.is_zero() {
                    coef.add_assign_ref(&(&(&cx[n + k] * &cy[n + l]) * &c.conj()));
                }
            }
        }
        for (a, out) in comps.iter_mut().enumerate() {
            out.add_assign_ref(&(&coef * frame.matrix().get(a, r)));
        }
    }
    VectorField { comps }
}
