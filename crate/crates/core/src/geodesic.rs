//! Geodesics of the Chern connection: the second-order asymptotic exponential
//! map in normal coordinates and a Runge-Kutta integrator of the full jet connection.

use crate::chern::{
    chern_connection, chern_coordinate_connection, connection_asymptotics, require_normal_orthonormal,
    CoordinateConnection, HermitianData,
};
use crate::error::{GeomError, Result};
use crate::forms::Geometry;
use crate::jet::{Jet, Mono};
use crate::normal_coords::J3Families;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

const TRUST_RADIUS: f64 = 0.2;
const RICHARDSON_TOL: f64 = 1e-12;
const MAX_STEPS: usize = 1 << 16;
pub const DEFAULT_STEPS: usize = 256;

type CVec = Vec<Complex64>;

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Quadratic part of an exponential map, `exp_z(v)_k = z_k + v_k + sum_{a,b} q^k_{ab}(z) w_a w_b`
/// with `w = (v, conj v)` and each `q^k_{ab}` of degree at most one, symmetric in `(a, b)`.
#[derive(Clone, Debug)]
pub struct QuadraticExp {
    n: usize,
    q: Vec<Jet>,
}

impl QuadraticExp {
    fn zero(n: usize) -> Self {
        QuadraticExp { n, q: vec![Jet::zero(n, 1); 4 * n * n * n] }
    }

    fn idx(&self, k: usize, a: usize, b: usize) -> usize {
        let d = 2 * self.n;
        (k * d + a) * d + b
    }

    pub fn get(&self, k: usize, a: usize, b: usize) -> &Jet {
        &self.q[self.idx(k, a, b)]
    }

    /// Adds `c m` to `q^k_{ab}` and `q^k_{ba}`, half each.
    fn add_sym(&mut self, k: usize, a: usize, b: usize, m: Mono, c: Complex64) {
        let half = 0.5 * c;
        let i = self.idx(k, a, b);
        self.q[i].add_term(m, half);
        let j = self.idx(k, b, a);
        self.q[j].add_term(m, half);
    }

    pub fn eval(&self, z: &[Complex64], v: &[Complex64]) -> CVec {
        let n = self.n;
        let w: CVec = v.iter().copied().chain(v.iter().map(|c| c.conj())).collect();
        (0..n)
            .map(|k| {
                let mut acc = z[k] + v[k];
                for a in 0..2 * n {
                    for b in 0..2 * n {
                        let q = self.get(k, a, b);
                        if !q.is_zero() {
                            acc += q.eval(z) * w[a] * w[b];
                        }
                    }
                }
                acc
            })
            .collect()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.q.iter().zip(&o.q).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// `q^k_{ab} = -1/2 gamma^k_{ab}` symmetrised, with `gamma` truncated to degree one.
    pub fn from_connection(conn: &CoordinateConnection) -> Self {
        let n = conn.n();
        let mut out = QuadraticExp::zero(n);
        for k in 0..n {
            for a in 0..2 * n {
                for b in 0..2 * n {
                    for (m, c) in conn.get(k, a, b).truncate(1).terms() {
                        out.add_sym(k, a, b, *m, -0.5 * c);
                    }
                }
            }
        }
        out
    }
}

/// Second-order expansion of `exp_z(v)` in normal coordinates:
/// `-1/2 sum [(Shat^{p,h}_{k,l} z_h + S^{p,hbar}_{k,l} zbar_h) v_p v_l + (S^{pbar,h}_{k,l} z_h + S^{pbar,hbar}_{k,l} zbar_h) conj(v_p) v_l]
/// + (i/4) sum [conj B^p_{k,l} + sum_h (conj B^{p,hbar}_{k,l} z_h + 2 conj B^{p,h}_{k,l} zbar_h)] conj(v_p) conj(v_l)`,
/// plus `(i/4) sum [conj B^{h,lbar}_{k,p} + sum_m H^l_{m,k} conj B^h_{m,p}] zbar_h conj(v_p) v_l` from the
/// `dz` part of the off-diagonal connection block when `with_off_block` is set. The linear metric terms
/// are assumed antisymmetric, `H^p_{l,k} = -H^l_{p,k}`.
pub fn exp_expansion(geo: &Geometry, hd: &HermitianData) -> Result<QuadraticExp> {
    expansion(geo, hd, true)
}

/// The expansion without the off-diagonal `conj(v_p) v_l` term.
pub fn exp_expansion_displayed(geo: &Geometry, hd: &HermitianData) -> Result<QuadraticExp> {
    expansion(geo, hd, false)
}

fn expansion(geo: &Geometry, hd: &HermitianData, with_off_block: bool) -> Result<QuadraticExp> {
    require_normal_orthonormal(geo, hd)?;
    let n = geo.n();
    let rep = connection_asymptotics(geo, hd)?;
    let fam = J3Families::from_structure(geo.structure());
    let s = &rep.formula;
    let lin: Vec<_> = (0..n).map(|p| hd.linear(p)).collect();
    let mut out = QuadraticExp::zero(n);
    let quarter_i = Complex64::new(0.0, 0.25);
    for k in 0..n {
        for p in 0..n {
            for l in 0..n {
                let (vp, vl, vbp, vbl) = (p, l, n + p, n + l);
                out.add_sym(k, vbp, vbl, Mono::ONE, quarter_i * fam.b1[p][(k, l)].conj());
                for h in 0..n {
                    let (zh, zbh) = (Mono::var(n, h), Mono::var(n, n + h));
                    out.add_sym(k, vp, vl, zh, -0.5 * rep.s_hat[p][h][(k, l)]);
                    out.add_sym(k, vp, vl, zbh, -0.5 * s.s_p_hbar[p][h][(k, l)]);
                    out.add_sym(k, vbp, vl, zh, -0.5 * s.s_pbar_h[p][h][(k, l)]);
                    out.add_sym(k, vbp, vl, zbh, -0.5 * s.s_pbar_hbar[p][h][(k, l)]);
                    out.add_sym(k, vbp, vbl, zh, quarter_i * fam.bmix[p][h][(k, l)].conj());
                    out.add_sym(k, vbp, vbl, zbh, 2.0 * quarter_i * fam.b2[p][h][(k, l)].conj());
                    if with_off_block {
                        let mut t = fam.bmix[h][l][(k, p)].conj();
                        for m in 0..n {
                            t += lin[l][(m, k)] * fam.b1[h][(m, p)].conj();
                        }
                        out.add_sym(k, vbp, vl, zbh, quarter_i * t);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `exp_z(v)` from the displayed expansion.
pub fn exp_asymptotic(geo: &Geometry, hd: &HermitianData, z: &[Complex64], v: &[Complex64]) -> Result<CVec> {
    Ok(exp_expansion(geo, hd)?.eval(z, v))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpConsistency {
    /// Displayed expansion against `-1/2 gamma(z)(w, w)` of the full connection, coefficientwise.
    pub residual: f64,
    /// The same restricted to the `z`-independent coefficients.
    pub origin_residual: f64,
    /// Residual of the expansion without the off-diagonal `conj(v_p) v_l` term.
    pub displayed_residual: f64,
}

pub fn exp_consistency(geo: &Geometry, hd: &HermitianData) -> Result<ExpConsistency> {
    let displayed = exp_expansion(geo, hd)?;
    let conn = chern_coordinate_connection(geo, &chern_connection(geo, hd)?)?;
    let derived = QuadraticExp::from_connection(&conn);
    let origin_residual = displayed
        .q
        .iter()
        .zip(&derived.q)
        .map(|(a, b)| (a.constant_term() - b.constant_term()).norm())
        .fold(0.0, f64::max);
    let displayed_residual = exp_expansion_displayed(geo, hd)?.distance(&derived);
    Ok(ExpConsistency { residual: displayed.distance(&derived), origin_residual, displayed_residual })
}

/// Geodesic equation `z'' = -gamma(z)(w, w)` of a coordinate connection with jet coefficients.
#[derive(Clone, Debug)]
pub struct GeodesicFlow {
    conn: CoordinateConnection,
}

#[derive(Clone, Debug)]
pub struct Endpoint {
    pub z: CVec,
    pub v: CVec,
    pub steps: usize,
    /// Change of the endpoint between the last two step counts.
    pub richardson_delta: f64,
}

impl GeodesicFlow {
    pub fn new(conn: &CoordinateConnection) -> Self {
        GeodesicFlow { conn: conn.trusted() }
    }

    pub fn chern(geo: &Geometry, hd: &HermitianData) -> Result<Self> {
        Ok(Self::new(&chern_coordinate_connection(geo, &chern_connection(geo, hd)?)?))
    }

    pub fn n(&self) -> usize {
        self.conn.n()
    }

    fn check(&self, z: &[Complex64], t: f64) -> Result<()> {
        if norm(z) > TRUST_RADIUS {
            return Err(GeomError::TrustRadius { time: t });
        }
        Ok(())
    }

    /// Classical RK4 with a fixed number of steps on `[0, 1]`.
    pub fn rk4(&self, z: &[Complex64], v: &[Complex64], steps: usize) -> Result<(CVec, CVec)> {
        let h = 1.0 / steps as f64;
        let axpy =
            |x: &[Complex64], y: &[Complex64], s: f64| -> CVec { x.iter().zip(y).map(|(a, b)| a + b * s).collect() };
        let (mut z, mut v) = (z.to_vec(), v.to_vec());
        self.check(&z, 0.0)?;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1z = v.clone();
            let k1v = self.conn.acceleration(&z, &v);
            let z2 = axpy(&z, &k1z, h / 2.0);
            self.check(&z2, t + h / 2.0)?;
            let k2z = axpy(&v, &k1v, h / 2.0);
            let k2v = self.conn.acceleration(&z2, &k2z);
            let z3 = axpy(&z, &k2z, h / 2.0);
            self.check(&z3, t + h / 2.0)?;
            let k3z = axpy(&v, &k2v, h / 2.0);
            let k3v = self.conn.acceleration(&z3, &k3z);
            let z4 = axpy(&z, &k3z, h);
            self.check(&z4, t + h)?;
            let k4z = axpy(&v, &k3v, h);
            let k4v = self.conn.acceleration(&z4, &k4z);
            for c in 0..z.len() {
                z[c] += h / 6.0 * (k1z[c] + 2.0 * k2z[c] + 2.0 * k3z[c] + k4z[c]);
                v[c] += h / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
            }
            self.check(&z, t + h)?;
        }
        Ok((z, v))
    }

    /// Integrates to `t = 1`, doubling the step count from `steps` until the endpoint moves by less than 1e-12.
    pub fn integrate(&self, z: &[Complex64], v: &[Complex64], steps: usize) -> Result<Endpoint> {
        let mut steps = steps.max(1);
        let mut z1 = self.rk4(z, v, steps)?.0;
        loop {
            let (z2, v2) = self.rk4(z, v, 2 * steps)?;
            let delta = max_diff(&z1, &z2);
            steps *= 2;
            if delta < RICHARDSON_TOL || steps >= MAX_STEPS {
                return Ok(Endpoint { z: z2, v: v2, steps, richardson_delta: delta });
            }
            z1 = z2;
        }
    }

    /// `|x(N) - x(2N)| / |x(2N) - x(4N)|`, about 16 for a fourth-order method.
    pub fn convergence_ratio(&self, z: &[Complex64], v: &[Complex64], steps: usize) -> Result<f64> {
        let a = self.rk4(z, v, steps)?.0;
        let b = self.rk4(z, v, 2 * steps)?.0;
        let c = self.rk4(z, v, 4 * steps)?.0;
        Ok(max_diff(&a, &b) / max_diff(&b, &c))
    }

    /// Integrates forward, then back from the endpoint with the reversed velocity.
    pub fn reversibility(&self, z: &[Complex64], v: &[Complex64], steps: usize) -> Result<f64> {
        let fwd = self.integrate(z, v, steps)?;
        let back: CVec = fwd.v.iter().map(|c| -c).collect();
        let ret = self.integrate(&fwd.z, &back, steps)?;
        Ok(max_diff(&ret.z, z))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicResult {
    pub z: Vec<(f64, f64)>,
    pub v: Vec<(f64, f64)>,
    pub endpoint_asymptotic: Vec<(f64, f64)>,
    pub endpoint_numeric: Vec<(f64, f64)>,
    pub error: f64,
    pub steps: usize,
    pub richardson_delta: f64,
}

fn pairs(v: &[Complex64]) -> Vec<(f64, f64)> {
    v.iter().map(|c| (c.re, c.im)).collect()
}

pub fn compare_geodesic(
    expansion: &QuadraticExp,
    flow: &GeodesicFlow,
    z: &[Complex64],
    v: &[Complex64],
    steps: usize,
) -> Result<GeodesicResult> {
    let asym = expansion.eval(z, v);
    let num = flow.integrate(z, v, steps)?;
    Ok(GeodesicResult {
        z: pairs(z),
        v: pairs(v),
        error: max_diff(&asym, &num.z),
        endpoint_asymptotic: pairs(&asym),
        endpoint_numeric: pairs(&num.z),
        steps: num.steps,
        richardson_delta: num.richardson_delta,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow {
    pub s: f64,
    pub e: f64,
    /// `log(e_prev / e) / log(s_prev / s)`; absent for the first scale.
    pub slope_partial: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScaleRow>,
    /// Least-squares slope of `log e` against `log s`; absent when every error is at the noise floor.
    pub slope: Option<f64>,
    /// Every error is below the noise floor.
    pub exact: bool,
}

const NOISE_FLOOR: f64 = 1e-13;

/// `e(s) = |exp_asymptotic(s z, s v) - integrate(s z, s v)|` over the scales, fitted in log-log.
pub fn error_scaling_probe(
    expansion: &QuadraticExp,
    flow: &GeodesicFlow,
    z: &[Complex64],
    v: &[Complex64],
    scales: &[f64],
    steps: usize,
) -> Result<ScalingReport> {
    let errs: Vec<f64> = scales
        .par_iter()
        .map(|&s| {
            let zs: CVec = z.iter().map(|c| c * s).collect();
            let vs: CVec = v.iter().map(|c| c * s).collect();
            compare_geodesic(expansion, flow, &zs, &vs, steps).map(|r| r.error)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ScaleRow> = scales
        .iter()
        .zip(&errs)
        .enumerate()
        .map(|(i, (&s, &e))| {
            let slope_partial = (i > 0 && e > NOISE_FLOOR && errs[i - 1] > NOISE_FLOOR)
                .then(|| (errs[i - 1] / e).ln() / (scales[i - 1] / s).ln());
            ScaleRow { s, e, slope_partial }
        })
        .collect();
    let exact = errs.iter().all(|&e| e <= NOISE_FLOOR);
    let pts: Vec<(f64, f64)> =
        scales.iter().zip(&errs).filter(|(_, &e)| e > NOISE_FLOOR).map(|(&s, &e)| (s.ln(), e.ln())).collect();
    let slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        num / den
    });
    Ok(ScalingReport { rows, slope, exact })
}

/// The default ladder `1, 1/2, 1/4, 1/8`.
pub fn default_scales() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125]
}
