//! Dispatch of the verification commands onto the library checks.

use super::report::{Report, Row};
use super::spec::{ManifoldSpec, StructureKind};
use crate::chern::{
    antisymmetrize_linear_terms, chern_connection, chern_lc_decomposition, compatibility_residual,
    connection_asymptotics, curvature, curvature_block_residual, curvature_origin_formula, jetmetri_check,
    lemchern_check, pointwise_curvature_formula, require_normal_orthonormal, sample_points, special_frame,
    theta11_hermitian_defect, transform_metric, HermitianData,
};
use crate::error::{GeomError, Result};
use crate::forms::{fundamental_identities_check, Geometry};
use crate::geodesic::{
    default_scales, error_scaling_probe, exp_consistency, exp_expansion, GeodesicFlow, DEFAULT_STEPS,
};
use crate::jet::{to_records, ExactComplex, Jet, JetMatrix, Mono};
use crate::normal_coords::{
    a_family_closed_form, a_from_b_series, a_matrix_from_family, coefficient_family, normalize_to_order,
    stage_stability, torsion_jet_diagnostic, torsion_jet_normal, verify_holomorphic_invariance,
};
use crate::structure::{nijenhuis_check, AlmostComplexStructure, BracketCoefficients, Frame};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Torsion,
    Normalize,
    Identities,
    Curvature,
    Decompose,
    Asymptotics,
    Geodesic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Torsion => "torsion",
            Command::Normalize => "normalize",
            Command::Identities => "identities",
            Command::Curvature => "curvature",
            Command::Decompose => "decompose",
            Command::Asymptotics => "asymptotics",
            Command::Geodesic => "geodesic",
        }
    }
}

/// Error-scaling slope required of the exponential-map expansion.
pub const SLOPE_BOUND: f64 = 2.8;
/// Allowed deviation of the RK4 step-halving ratio from 16.
pub const RATIO_SLACK: f64 = 3.2;

#[derive(Clone, Debug)]
pub struct GeodesicOptions {
    pub z: Option<Vec<Complex64>>,
    pub v: Option<Vec<Complex64>>,
    pub scales: Option<Vec<f64>>,
    pub steps: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions { z: None, v: None, scales: None, steps: DEFAULT_STEPS }
    }
}

#[derive(Clone, Debug)]
pub struct Flags {
    pub tol: f64,
    pub order: Option<u32>,
    pub seed: Option<u64>,
    pub exact: bool,
    pub geodesic: GeodesicOptions,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { tol: 1e-10, order: None, seed: None, exact: false, geodesic: GeodesicOptions::default() }
    }
}

struct Ctx<'a> {
    spec: &'a ManifoldSpec,
    flags: &'a Flags,
    s: AlmostComplexStructure,
    seed: u64,
    data: serde_json::Map<String, Value>,
}

impl Ctx<'_> {
    fn tol(&self) -> f64 {
        self.flags.tol
    }

    fn n(&self) -> usize {
        self.s.n()
    }

    fn metric(&self) -> Result<HermitianData> {
        self.spec.metric(self.flags.order)
    }

    fn geometry(&self) -> Result<Geometry> {
        Geometry::new(&self.s)
    }
}

/// Geometry and metric in normal coordinates of order 3 with `H(0) = I`;
/// the spec coordinates are normalized first when needed.
fn normal_setting(ctx: &mut Ctx) -> Result<(Geometry, HermitianData)> {
    let g = ctx.geometry()?;
    let hd = ctx.metric()?;
    if require_normal_orthonormal(&g, &hd).is_ok() {
        return Ok((g, hd));
    }
    let res = normalize_to_order(&ctx.s, 3.min(ctx.s.order()))?;
    let (s2, h2) = transform_metric(&g, &hd, &res.phi)?;
    let g2 = Geometry::new(&s2)?;
    require_normal_orthonormal(&g2, &h2)?;
    ctx.data.insert("coordinates".into(), json!("normalized to order 3"));
    Ok((g2, h2))
}

fn symmetric_linear_part(hd: &HermitianData) -> f64 {
    let n = hd.n();
    let lin: Vec<_> = (0..n).map(|p| hd.linear(p)).collect();
    let mut worst: f64 = 0.0;
    for p in 0..n {
        for l in 0..n {
            for m in 0..n {
                worst = worst.max((lin[p][(l, m)] + lin[l][(p, m)]).norm());
            }
        }
    }
    worst
}

/// Runs one command on one spec. Module errors become failed rows.
pub fn run_command(cmd: Command, spec: &ManifoldSpec, flags: &Flags, fixture: &str) -> Report {
    let mut report = Report::new(cmd.name(), fixture);
    let s = match spec.structure(flags.order) {
        Ok(s) => s,
        Err(e) => {
            report.push(Row::error("structure", e));
            return report;
        }
    };
    let seed = flags.seed.or(spec.seed).unwrap_or(0);
    let mut ctx = Ctx { spec, flags, s, seed, data: serde_json::Map::new() };
    let res = match cmd {
        Command::Validate => validate(&mut ctx, &mut report),
        Command::Torsion => torsion(&mut ctx, &mut report),
        Command::Normalize => normalize(&mut ctx, &mut report),
        Command::Identities => identities(&mut ctx, &mut report),
        Command::Curvature => curvature_cmd(&mut ctx, &mut report),
        Command::Decompose => decompose(&mut ctx, &mut report),
        Command::Asymptotics => asymptotics(&mut ctx, &mut report),
        Command::Geodesic => geodesic(&mut ctx, &mut report),
    };
    if let Err(e) = res {
        report.push(Row::error(cmd.name(), e));
    }
    if !ctx.data.is_empty() {
        report.data = Some(Value::Object(ctx.data));
    }
    report
}

fn cval(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn fmt_c(c: Complex64) -> String {
    format!("{:.6}{:+.6}i", c.re, c.im)
}

fn matrix_records(m: &JetMatrix) -> Value {
    let mut out = Vec::new();
    for k in 0..m.rows() {
        for l in 0..m.cols() {
            let f = m.get(k, l);
            if !f.is_zero() {
                out.push(json!({"k": k + 1, "l": l + 1, "terms": to_records(f)}));
            }
        }
    }
    Value::Array(out)
}

fn bool_row(name: &str, holds: bool, detail: String) -> Row {
    Row::at_most(name, if holds { 0.0 } else { 1.0 }, 0.0).with_detail(detail)
}

fn to_exact(m: &JetMatrix) -> JetMatrix<ExactComplex> {
    m.map_field(|c| {
        let q = |x: f64| BigRational::from_float(x).expect("finite coefficient");
        Complex::new(q(c.re), q(c.im))
    })
}

/// Largest coefficient of degree `<= upto` in `a - b`.
fn discrepancy<C: crate::jet::Coeff>(a: &JetMatrix<C>, b: &JetMatrix<C>, upto: u32) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for (x, y) in a.entries().zip(b.entries()) {
        let d = x.try_sub(y).expect("same shape");
        for (m, c) in d.terms() {
            if m.degree() <= upto && !c.is_negligible() {
                worst = worst.max(c.modulus());
                nonzero += 1;
            }
        }
    }
    (worst, nonzero)
}

fn validate(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let v = ctx.s.validate();
    let tol = ctx.tol();
    r.push(Row::at_most("J^2 = -I, diagonal blocks", v.square, tol));
    r.push(Row::at_most("J^2 = -I, off-diagonal blocks", v.anticommute, tol));
    r.push(bool_row(
        "adapted at 0: A(0) = iI, B(0) = 0",
        ctx.s.is_adapted(tol),
        format!("effective order {}", v.effective_order),
    ));
    if ctx.spec.structure.kind != StructureKind::BNormal {
        return Ok(());
    }
    let b = ctx.s.b();
    let (n, order) = (ctx.n(), ctx.s.order());
    let upto = order.min(5);
    let closed = a_matrix_from_family(&a_family_closed_form(&coefficient_family(b), n, order), n, order);
    let solved = a_from_b_series(&b.map(|e| e.clone().exact()));
    let (d, _) = discrepancy(&closed, &solved, upto);
    r.push(Row::at_most(format!("A from B: closed sum vs series, degree <= {upto}"), d, tol));
    if ctx.flags.exact {
        let bx = to_exact(b);
        let upto = order.min(4);
        let closed = a_matrix_from_family(&a_family_closed_form(&coefficient_family(&bx), n, order), n, order);
        let solved = a_from_b_series(&bx.map(|e| e.clone().exact()));
        let (worst, count) = discrepancy(&closed, &solved, upto);
        r.push(
            Row::at_most(format!("A from B: closed sum vs series, exact, degree <= {upto}"), count as f64, 0.0)
                .with_detail(format!("nonzero differences, largest {worst:.3e}")),
        );
    }
    Ok(())
}

/// `s` itself when its torsion 1-jet formula applies, else its order-3 normalization.
fn normal_version(s: &AlmostComplexStructure) -> Result<(AlmostComplexStructure, bool)> {
    if torsion_jet_normal(s).is_ok() {
        return Ok((s.clone(), false));
    }
    Ok((normalize_to_order(s, 3.min(s.order()))?.structure, true))
}

fn torsion(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let frame = Frame::new(&ctx.s)?;
    let bc = BracketCoefficients::new(&frame);
    r.push(Row::at_most("4 N_J vs frame-bracket torsion", nijenhuis_check(&ctx.s, &frame, &bc), tol));
    let (s, normalized) = normal_version(&ctx.s)?;
    let n = s.n();
    let jet = torsion_jet_normal(&s)?;
    let bcn = BracketCoefficients::new(&Frame::new(&s)?);
    let mut worst: f64 = 0.0;
    let mut origin = Vec::new();
    for r_ in 0..n {
        for k in 0..n {
            for l in 0..n {
                worst = worst.max(bcn.nbar[r_][k][l].truncate(1).distance(&jet[r_][k][l]));
                let c = jet[r_][k][l].constant_term();
                if k < l && c.norm() > 0.0 {
                    origin.push(json!({"r": r_ + 1, "k": k + 1, "l": l + 1, "value": cval(c)}));
                }
            }
        }
    }
    let note = if normalized { "after normalization to order 3" } else { "structure already normal" };
    let largest = origin
        .first()
        .map(|o| {
            format!(
                "; Nbar^{}_{{{},{}}}(0) = {}",
                o["r"],
                o["k"],
                o["l"],
                fmt_c(Complex64::new(o["value"][0].as_f64().unwrap(), o["value"][1].as_f64().unwrap()))
            )
        })
        .unwrap_or_default();
    r.push(
        Row::at_most("torsion 1-jet: frame brackets vs B-formula", worst, tol).with_detail(format!("{note}{largest}")),
    );
    for k in 0..=1u32.min(s.order().saturating_sub(1)) {
        let d = torsion_jet_diagnostic(&s, k, tol)?;
        r.push(bool_row(
            &format!("torsion {k}-jet vanishes <=> B vanishes to order {}", k + 1),
            d.equivalence_holds(),
            format!("torsion {}, formula {}, B {}", d.torsion_jet_vanishes, d.formula_jet_vanishes, d.b_vanishes),
        ));
    }
    ctx.data.insert("nbar_origin".into(), Value::Array(origin));
    ctx.data.insert("normalized".into(), json!(normalized));
    Ok(())
}

fn random_holomorphic(n: usize, degree: u32, seed: u64) -> Vec<Jet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Jet::from_terms(
                n,
                degree,
                Mono::holomorphic_of_degree(n, degree)
                    .into_iter()
                    .map(|m| (m, Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))))
                    .collect::<Vec<_>>(),
            )
            .exact()
        })
        .collect()
}

fn normalize(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let upto = ctx.s.order();
    let res = normalize_to_order(&ctx.s, upto)?;
    r.push(Row::at_most(format!("normal-form violation to order {upto}"), res.violation(), tol));
    r.push(Row::at_most("stage stability of lower-degree coefficients", stage_stability(&res), tol));
    let again = normalize_to_order(&res.structure, upto)?;
    r.push(Row::at_most("re-normalization is the identity", again.phi.deviation_from_identity(), tol));
    r.push(Row::at_most("J^2 = -I after normalization", res.structure.validate().residual(), tol));
    let order = res.structure.order();
    let c = random_holomorphic(ctx.n(), order + 1, ctx.seed);
    let inv = verify_holomorphic_invariance(&res.structure, &c)?;
    r.push(Row::at_most(format!("B invariant under a holomorphic change of degree {}", order + 1), inv.deviation, tol));
    r.push(Row::at_most("normal form kept under that change", inv.violation, tol));
    let phi: Vec<Value> = res.phi.forward().iter().map(|f| json!(to_records(f))).collect();
    let stages: Vec<Value> =
        res.stages.iter().map(|st| Value::Array(st.forward().iter().map(|f| json!(to_records(f))).collect())).collect();
    ctx.data.insert("phi".into(), Value::Array(phi));
    ctx.data.insert("stages".into(), Value::Array(stages));
    ctx.data.insert("b".into(), matrix_records(res.structure.b()));
    ctx.data.insert("a".into(), matrix_records(res.structure.a()));
    Ok(())
}

fn identities(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let g = ctx.geometry()?;
    for row in fundamental_identities_check(&g, ctx.seed)? {
        r.push(
            Row::at_most(row.identity, row.max_residual, ctx.tol())
                .with_detail(format!("checked to degree {}", row.order_checked)),
        );
    }
    Ok(())
}

fn curvature_cmd(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let g = ctx.geometry()?;
    let hd = ctx.metric()?;
    let conn = chern_connection(&g, &hd)?;
    let blocks = curvature(&g, &conn)?;
    let c0 = &blocks.c_origin;
    r.push(Row::at_most("Chern connection preserves h", compatibility_residual(&g, hd.matrix(), &conn)?, tol));
    r.push(Row::at_most("curvature blocks vs D^2", curvature_block_residual(&g, &conn, &blocks)?, tol));
    r.push(Row::at_most("hermitian symmetry of C(0)", c0.hermitian_defect(), tol));
    let z = &sample_points(ctx.n())[1];
    r.push(Row::at_most(
        "hermitian symmetry of Theta^{1,1} at a sample point",
        theta11_hermitian_defect(&blocks, &hd, z, ctx.seed),
        tol,
    ));
    let mut largest = (Complex64::new(0.0, 0.0), [0; 4]);
    let mut comps = Vec::new();
    let n = ctx.n();
    for j in 0..n {
        for k in 0..n {
            for m in 0..n {
                for l in 0..n {
                    let c = c0.get(j, k, m, l);
                    if c.norm() > 1e-14 {
                        comps.push(json!({"j": j + 1, "k": k + 1, "m": m + 1, "l": l + 1, "value": cval(c)}));
                    }
                    if c.norm() > largest.0.norm() {
                        largest = (c, [j + 1, k + 1, m + 1, l + 1]);
                    }
                }
            }
        }
    }
    let [j, k, m, l] = largest.1;
    let value = if j == 0 {
        "C(0) = 0".to_string()
    } else {
        format!("largest C^{{{j},{k}}}_{{{m},{l}}}(0) = {}", fmt_c(largest.0))
    };
    // Both closed formulas are stated in normal coordinates.
    let (gn, hn) = normal_setting(ctx)?;
    let cn = curvature(&gn, &chern_connection(&gn, &hn)?)?.c_origin;
    let f = curvature_origin_formula(&gn, &hn)?;
    r.push(Row::at_most("C(0) vs origin formula in normal coordinates", f.distance(&cn), tol).with_detail(&value));
    let p = pointwise_curvature_formula(&gn, &hn)?;
    r.push(Row::at_most("C(0) vs pointwise formula", p.distance(&cn), tol).with_detail(value));
    ctx.data.insert("c_origin".into(), Value::Array(comps));
    Ok(())
}

fn decompose(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let g = ctx.geometry()?;
    let hd = ctx.metric()?;
    let d = chern_lc_decomposition(&g, &hd)?;
    r.push(Row::at_most("D = nabla + delta - N at sample points", d.residual, tol));
    r.push(Row::at_most("torsion of D from the decomposition", d.torsion_residual, tol));
    r.push(Row::at_most("coordinate Chern matrix is real", d.block_reality_defect, tol));
    if g.brackets().max_torsion() == 0.0 {
        r.push(Row::at_most("N^omega vanishes on an integrable structure", d.n_omega_max(), 0.0));
    }
    ctx.data.insert("domega_max".into(), json!(d.domega_max));
    ctx.data.insert("delta_max".into(), json!(d.delta_max()));
    ctx.data.insert("n_omega_max".into(), json!(d.n_omega_max()));
    ctx.data.insert("gamma02_max".into(), json!(d.gamma02_max()));
    ctx.data.insert("torsion_residual_opposite_gamma_sign".into(), json!(d.torsion_residual_flipped));
    Ok(())
}

fn asymptotics(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let (g, hd) = normal_setting(ctx)?;
    let a = connection_asymptotics(&g, &hd)?;
    let names = ["H^p", "S^{p,h}", "S^{p,hbar}", "S^{pbar,h}", "S^{pbar,hbar}"];
    for (name, v) in names.iter().zip(a.family_residuals) {
        r.push(Row::at_most(format!("connection coefficients {name} vs full connection"), v, tol));
    }
    r.push(Row::at_most("off-diagonal connection block to degree 1", a.off_block_residual, tol));
    let j = jetmetri_check(&g, &hd)?;
    r.push(Row::at_most("metric in coordinates: dz^dz part", j.holomorphic_part_residual, tol));
    r.push(Row::at_most("metric in coordinates: dz^dzbar part", j.mixed_part_residual, tol));
    let sf = special_frame(&g, &hd)?;
    r.push(Row::at_most("special frame: A''(0)", sf.a2_origin, tol));
    r.push(Row::at_most("special frame: (del A'')(0)", sf.da2_origin, tol));
    r.push(Row::at_most("special frame: linear terms of H", sf.h_linear, tol));
    r.push(Row::at_most("special frame: z_j z_k terms of H", sf.h_pure_quadratic, tol));
    r.push(Row::at_most("special frame: A' recomputed from (H, A'')", sf.consistency, tol));
    let l = lemchern_check(&g, &sf, ctx.seed)?;
    r.push(Row::at_most("curvature via del-bar-del h and D sigma", l.spec_residual, tol));
    r.push(Row::at_most("i del delbar |sigma|^2 identity", l.psh_residual, tol));
    ctx.data.insert(
        "reported_variants".into(),
        json!({
            "s_pbar_h_plus_sign": a.plus_sign_residuals[0],
            "s_pbar_hbar_plus_sign": a.plus_sign_residuals[1],
            "off_block_without_linear_terms": a.off_block_bare_residual,
            "dz_dz_without_linear_terms": j.holomorphic_display_residual,
            "dz_dzbar_with_plus_i_over_4": j.mixed_display_residual,
            "fitted_mixed_coefficient": j.fitted_coefficient,
        }),
    );
    Ok(())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn geodesic(ctx: &mut Ctx, r: &mut Report) -> Result<()> {
    let tol = ctx.tol();
    let n = ctx.n();
    let opts = &ctx.flags.geodesic;
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let z = opts.z.clone().unwrap_or_else(|| zero.clone());
    let v = opts.v.clone().unwrap_or_else(|| {
        let mut v = zero.clone();
        v[0] = Complex64::new(0.04, 0.0);
        if n > 1 {
            v[1] = Complex64::new(0.02, 0.0);
        }
        v
    });
    for (name, x) in [("--z", &z), ("--v", &v)] {
        if x.len() != n {
            return Err(GeomError::Precondition(format!("{name} needs {n} complex values, got {}", x.len())));
        }
    }
    let scales = opts.scales.clone().unwrap_or_else(default_scales);
    let (mut g, mut hd) = normal_setting(ctx)?;
    let sym = symmetric_linear_part(&hd);
    if sym > 1e-14 {
        let anti = antisymmetrize_linear_terms(&g, &hd)?;
        g = Geometry::new(&anti.structure)?;
        hd = anti.metric;
        ctx.data.insert(
            "linear_metric_terms".into(),
            json!({"symmetric_part_before": sym, "symmetric_part_after": anti.symmetric_part_after, "normal_violation": anti.normal_violation}),
        );
    }
    let expansion = exp_expansion(&g, &hd)?;
    let flow = GeodesicFlow::chern(&g, &hd)?;
    let probe = error_scaling_probe(&expansion, &flow, &z, &v, &scales, opts.steps)?;
    match probe.slope {
        Some(slope) => r.push(Row::at_least("error scaling slope of the expansion", slope, SLOPE_BOUND)),
        None => {
            let worst = probe.rows.iter().map(|row| row.e).fold(0.0, f64::max);
            r.push(Row::at_most("expansion error (exact at every scale)", worst, tol.max(1e-12)));
        }
    }
    // RK4 order is probed off the origin with |v| = 0.1 so that step differences sit well above rounding.
    let zp: Vec<Complex64> =
        (0..n).map(|k| Complex64::new(if k % 2 == 0 { 0.03 } else { -0.03 }, 0.02 / (k + 1) as f64)).collect();
    let vn = norm(&v);
    let vp: Vec<Complex64> =
        if vn > 0.0 { v.iter().map(|c| c * (0.1 / vn)).collect() } else { zp.iter().map(|c| c * 2.0).collect() };
    let a = flow.rk4(&zp, &vp, 2)?.0;
    let b = flow.rk4(&zp, &vp, 4)?.0;
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if diff > 1e-14 {
        let ratio = flow.convergence_ratio(&zp, &vp, 2)?;
        r.push(
            Row::at_most("RK4 step-halving ratio, |ratio - 16|", (ratio - 16.0).abs(), RATIO_SLACK)
                .with_detail(format!("ratio {ratio:.3}")),
        );
    } else {
        ctx.data.insert("rk4_ratio_skipped".into(), json!(format!("step difference {diff:.1e} at the probe")));
    }
    r.push(Row::at_most("integrator reversibility", flow.reversibility(&z, &v, opts.steps)?, tol));
    let c = exp_consistency(&g, &hd)?;
    r.push(
        Row::at_most("quadratic expansion vs full connection", c.residual, tol)
            .with_detail(format!("displayed form without the conj(v) v term: {:.3e}", c.displayed_residual)),
    );
    ctx.data.insert("scales".into(), serde_json::to_value(&probe.rows).expect("rows serialize"));
    ctx.data.insert("slope".into(), json!(probe.slope));
    ctx.data.insert("exact".into(), json!(probe.exact));
    Ok(())
}
