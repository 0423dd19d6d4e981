//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use acgeom::chern::{
    chern_connection, chern_lc_decomposition, connection_asymptotics, curvature, curvature_origin_formula,
    jetmetri_check, lemchern_check, pointwise_curvature_formula, special_frame, HermitianData,
};
use acgeom::cli::{parse_manifold_spec, serialize_manifold_spec};
use acgeom::fixtures::*;
use acgeom::forms::{fundamental_identities_check, Geometry};
use acgeom::geodesic::{
    default_scales, error_scaling_probe, exp_asymptotic, exp_expansion, GeodesicFlow, DEFAULT_STEPS,
};
use acgeom::jet::{exact, exact_is_zero, ExactComplex, Jet, JetMatrix, Mono};
use acgeom::normal_coords::{
    a_family_closed_form, a_from_b_series, a_matrix_from_family, coefficient_family, normalize_to_order,
    structure_from_b, torsion_jet_diagnostic, verify_holomorphic_invariance,
};
use acgeom::structure::{nijenhuis_check, AlmostComplexStructure, BracketCoefficients, Frame};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn single_b(order: u32, m: Mono, v: Complex64) -> AlmostComplexStructure {
    let mut b = JetMatrix::zeros(2, 2, 2, order);
    b.set(0, 0, Jet::monomial(2, order, m, v).exact());
    structure_from_b(b).expect("valid structure")
}

fn identities_suite() -> Outcome {
    let mut cases: Vec<(String, AlmostComplexStructure)> =
        vec![("J0".into(), fix_j0(2, 4)), ("FIX-B".into(), fix_b(4))];
    for (n, seed) in [(2, 1), (2, 2), (2, 3), (3, 4), (3, 5)] {
        cases.push((format!("random n={n} seed={seed}"), random_structure(n, 4, seed)));
    }
    let mut worst: f64 = 0.0;
    for (name, s) in &cases {
        let g = Geometry::new(s).map_err(err)?;
        let rows = fundamental_identities_check(&g, 17).map_err(err)?;
        ensure(rows.len() == 7, format!("{name}: {} identities", rows.len()))?;
        for row in &rows {
            if name == "J0" {
                ensure(row.max_residual == 0.0, format!("J0 {}: {:e}", row.identity, row.max_residual))?;
            }
            ensure(row.max_residual < 1e-10, format!("{name} {}: {:e}", row.identity, row.max_residual))?;
            worst = worst.max(row.max_residual);
        }
    }
    Ok(format!("7 identities on {} structures, worst {worst:.1e}", cases.len()))
}

fn structure_suite() -> Outcome {
    let fixtures = [
        ("FIX-B", fix_b(4)),
        ("B = b z_2^2", fix_b_quadratic(5)),
        ("random normal", random_normal_structure(2, 4, 3)),
        ("deformation n=2", random_structure(2, 4, 8)),
        ("deformation n=3", random_structure(3, 4, 9)),
    ];
    let mut worst: f64 = 0.0;
    for (name, s) in &fixtures {
        let r = s.validate().residual();
        ensure(r < 1e-11, format!("{name}: J^2 residual {r:e}"))?;
        worst = worst.max(r);
    }
    let (n, order) = (2usize, 4u32);
    let t = |a: [u32; 2], b: [u32; 2], v: ExactComplex| Jet::monomial(n, order, Mono::new(&a, &b), v);
    let mut b: JetMatrix<ExactComplex> = JetMatrix::zeros(n, n, n, order);
    b.set(0, 0, &t([0, 1], [0, 0], exact(1, 2, 1, 3)) + &t([0, 1], [1, 0], exact(-1, 4, 0, 1)));
    b.set(1, 0, &t([0, 1], [0, 0], exact(0, 1, 2, 5)) + &t([1, 1], [0, 0], exact(1, 7, 1, 7)));
    b.set(0, 1, &t([0, 2], [0, 1], exact(3, 8, -1, 2)) + &t([0, 1], [0, 1], exact(1, 5, 0, 1)));
    b.set(1, 1, t([0, 2], [1, 0], exact(-2, 9, 1, 6)));
    let b = b.map(|e| e.clone().exact());
    let closed = a_matrix_from_family(&a_family_closed_form(&coefficient_family(&b), n, order), n, order);
    let solved = a_from_b_series(&b);
    let mut nonzero = 0;
    let mut compared = 0;
    for (x, y) in closed.entries().zip(solved.entries()) {
        for (m, v) in (x - y).terms() {
            if m.degree() <= 4 && !exact_is_zero(v) {
                nonzero += 1;
            }
        }
        compared += x.len().max(y.len());
    }
    ensure(nonzero == 0, format!("{nonzero} exact discrepancies"))?;
    ensure(compared > 0, "nothing compared".into())?;
    Ok(format!("J^2 residual worst {worst:.1e}; exact closed sum = series on {compared} coefficients"))
}

fn normal_form_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, seed) in [(2usize, 21u64), (2, 22), (3, 23)] {
        let s = random_structure(n, 3, seed);
        let r = normalize_to_order(&s, 3).map_err(err)?;
        ensure(r.violation() < 1e-11, format!("n={n} seed={seed}: violation {:e}", r.violation()))?;
        let again = normalize_to_order(&r.structure, 3).map_err(err)?;
        let d = again.phi.deviation_from_identity();
        ensure(d < 1e-11, format!("re-run deviates by {d:e}"))?;
        let order = r.structure.order();
        let change: Vec<Jet> = (0..n)
            .map(|k| {
                let m = Mono::holomorphic_of_degree(n, order + 1)[k % n];
                Jet::monomial(n, order + 1, m, c(0.1 * (k + 1) as f64, -0.05)).exact()
            })
            .collect();
        let inv = verify_holomorphic_invariance(&r.structure, &change).map_err(err)?;
        ensure(inv.deviation < 1e-11, format!("invariance deviation {:e}", inv.deviation))?;
        worst = worst.max(r.violation()).max(d).max(inv.deviation);
    }
    Ok(format!("violation, re-run and degree-4 invariance worst {worst:.1e}"))
}

fn torsion_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [fix_b(4), random_structure(2, 4, 31), random_structure(3, 3, 32)] {
        let frame = Frame::new(&s).map_err(err)?;
        let bc = BracketCoefficients::new(&frame);
        let d = nijenhuis_check(&s, &frame, &bc);
        ensure(d < 1e-11, format!("4 N_J vs bracket torsion {d:e}"))?;
        worst = worst.max(d);
    }
    let bc = BracketCoefficients::new(&Frame::new(&fix_b(4)).map_err(err)?);
    let nb = bc.nbar[0][0][1].constant_term();
    ensure((nb - c(-0.05, 0.15)).norm() < 1e-12, format!("Nbar^1_(1,2)(0) = {nb}"))?;
    let b = FIXB_B;
    let cases = [
        (0, single_b(4, Mono::new(&[0, 1], &[0, 0]), b), false),
        (0, single_b(4, Mono::new(&[0, 2], &[0, 0]), b), true),
        (1, single_b(4, Mono::new(&[0, 2], &[0, 0]), b), false),
        (1, single_b(4, Mono::new(&[0, 3], &[0, 0]), b), true),
    ];
    for (k, s, vanishes) in &cases {
        let d = torsion_jet_diagnostic(s, *k, 1e-12).map_err(err)?;
        ensure(d.torsion_jet_vanishes == *vanishes && d.equivalence_holds(), format!("k={k}: {d:?}"))?;
    }
    Ok(format!("N_J identity worst {worst:.1e}; Nbar^1_(1,2)(0) = {:.2}{:+.2}i; 4 diagnostic cases", nb.re, nb.im))
}

fn decomposition_suite() -> Outcome {
    let fixtures: Vec<(&str, AlmostComplexStructure, HermitianData)> = vec![
        ("J0", fix_j0(2, 4), HermitianData::identity(2, 4)),
        ("J0 symplectic", fix_j0(2, 4), symplectic_metric(2, 4, c(0.2, 0.1))),
        ("J0 non-closed", fix_j0(2, 4), nonclosed_metric(2, 4)),
        ("FIX-B", fix_b(4), HermitianData::identity(2, 4)),
        ("FIX-B random metric", fix_b(4), random_metric(2, 4, 5, true)),
        ("random", random_normal_structure(2, 4, 6), random_metric(2, 4, 7, true)),
    ];
    let mut worst: f64 = 0.0;
    let mut dsym = f64::NAN;
    let mut dnon = f64::NAN;
    for (name, s, hd) in &fixtures {
        let g = Geometry::new(s).map_err(err)?;
        let d = chern_lc_decomposition(&g, hd).map_err(err)?;
        ensure(d.residual < 1e-10, format!("{name}: decomposition {:e}", d.residual))?;
        ensure(d.torsion_residual < 1e-10, format!("{name}: torsion form {:e}", d.torsion_residual))?;
        worst = worst.max(d.residual).max(d.torsion_residual);
        if name.starts_with("J0") {
            ensure(d.n_omega_max() == 0.0, format!("{name}: N^omega = {:e}", d.n_omega_max()))?;
        }
        match *name {
            "J0 symplectic" => dsym = d.delta_max(),
            "J0 non-closed" => dnon = d.delta_max(),
            _ => {}
        }
    }
    ensure(dsym == 0.0, format!("delta on the symplectic fixture {dsym:e}"))?;
    ensure(dnon > 1e-3, format!("delta on the non-closed fixture {dnon:e}"))?;
    Ok(format!("residuals worst {worst:.1e}; delta symplectic {dsym:.1e}, non-closed {dnon:.2e}"))
}

fn curvature_suite() -> Outcome {
    let fixtures: Vec<(&str, AlmostComplexStructure, HermitianData)> = vec![
        ("FIX-B", fix_b(4), HermitianData::identity(2, 4)),
        ("FIX-B random metric", fix_b(4), random_metric(2, 4, 11, true)),
        ("random normal", random_normal_structure(2, 4, 12), random_metric(2, 4, 13, true)),
        ("random normal n=3", random_normal_structure(3, 4, 14), random_metric(3, 4, 15, false)),
    ];
    let mut worst: f64 = 0.0;
    let mut c2211 = c(f64::NAN, 0.0);
    for (name, s, hd) in &fixtures {
        let g = Geometry::new(s).map_err(err)?;
        let c0 = curvature(&g, &chern_connection(&g, hd).map_err(err)?).map_err(err)?.c_origin;
        let f = curvature_origin_formula(&g, hd).map_err(err)?.distance(&c0);
        ensure(f < 1e-11, format!("{name}: origin formula {f:e}"))?;
        let h = c0.hermitian_defect();
        ensure(h < 1e-11, format!("{name}: hermitian symmetry {h:e}"))?;
        let p = pointwise_curvature_formula(&g, hd).map_err(err)?.distance(&c0);
        ensure(p < 1e-10, format!("{name}: pointwise formula {p:e}"))?;
        worst = worst.max(f).max(h).max(p);
        if *name == "FIX-B" {
            c2211 = c0.get(1, 1, 0, 0);
        }
    }
    ensure((c2211 - c(0.05, 0.0)).norm() < 1e-12, format!("FIX-B C^(2,2)_(1,1)(0) = {c2211}"))?;
    Ok(format!("formulas worst {worst:.1e}; FIX-B C^(2,2)_(1,1)(0) = {:.4}", c2211.re))
}

fn special_frame_suite() -> Outcome {
    let fixtures: Vec<(&str, AlmostComplexStructure, HermitianData)> = vec![
        ("FIX-B random metric", fix_b(4), random_metric(2, 4, 41, true)),
        ("random normal", random_normal_structure(2, 4, 42), random_metric(2, 4, 43, true)),
        ("random normal n=3", random_normal_structure(3, 4, 44), random_metric(3, 4, 45, true)),
    ];
    let mut worst_frame: f64 = 0.0;
    let mut worst_lem: f64 = 0.0;
    for (name, s, hd) in &fixtures {
        let g = Geometry::new(s).map_err(err)?;
        let sf = special_frame(&g, hd).map_err(err)?;
        for (what, v) in [
            ("A''(0)", sf.a2_origin),
            ("del A''(0)", sf.da2_origin),
            ("H linear", sf.h_linear),
            ("H z_j z_k", sf.h_pure_quadratic),
        ] {
            ensure(v < 1e-12, format!("{name}: {what} {v:e}"))?;
            worst_frame = worst_frame.max(v);
        }
        let l = lemchern_check(&g, &sf, 3).map_err(err)?;
        let v = l.spec_residual.max(l.psh_residual);
        ensure(v < 1e-10, format!("{name}: curvature identities {v:e}"))?;
        worst_lem = worst_lem.max(v);
    }
    Ok(format!("frame conditions worst {worst_frame:.1e}; identities at 0 worst {worst_lem:.1e}"))
}

fn asymptotics_suite() -> Outcome {
    let fixtures: Vec<(&str, AlmostComplexStructure, HermitianData)> = vec![
        ("FIX-B", fix_b(4), HermitianData::identity(2, 4)),
        ("random normal 1", random_normal_structure(2, 4, 51), random_metric(2, 4, 52, true)),
        ("random normal 2", random_normal_structure(2, 4, 53), symplectic_metric(2, 4, c(0.1, 0.05))),
        ("random normal 3", random_normal_structure(3, 4, 54), random_metric(3, 4, 55, false)),
    ];
    let mut worst_s: f64 = 0.0;
    let mut worst_m: f64 = 0.0;
    for (name, s, hd) in &fixtures {
        let g = Geometry::new(s).map_err(err)?;
        let a = connection_asymptotics(&g, hd).map_err(err)?;
        ensure(
            a.residual() < 1e-11,
            format!("{name}: connection coefficients {:e} {:?}", a.residual(), a.family_residuals),
        )?;
        let j = jetmetri_check(&g, hd).map_err(err)?;
        ensure(j.residual() < 1e-11, format!("{name}: metric expansion {:e}", j.residual()))?;
        worst_s = worst_s.max(a.residual());
        worst_m = worst_m.max(j.residual());
    }
    Ok(format!("connection coefficients worst {worst_s:.1e}; metric expansion worst {worst_m:.1e}"))
}

fn geodesic_suite() -> Outcome {
    let g0 = Geometry::new(&fix_j0(2, 4)).map_err(err)?;
    let h0 = HermitianData::identity(2, 4);
    let flat = GeodesicFlow::chern(&g0, &h0).map_err(err)?;
    let (z, v) = ([c(0.05, -0.02), c(0.01, 0.03)], [c(0.04, 0.01), c(-0.02, 0.03)]);
    let end = flat.integrate(&z, &v, DEFAULT_STEPS).map_err(err)?;
    let asym = exp_asymptotic(&g0, &h0, &z, &v).map_err(err)?;
    let mut flat_err: f64 = 0.0;
    for k in 0..2 {
        flat_err = flat_err.max((end.z[k] - z[k] - v[k]).norm()).max((asym[k] - z[k] - v[k]).norm());
    }
    ensure(flat_err < 1e-12, format!("flat exp deviates by {flat_err:e}"))?;

    let g = Geometry::new(&fix_b(4)).map_err(err)?;
    let hd = HermitianData::identity(2, 4);
    let flow = GeodesicFlow::chern(&g, &hd).map_err(err)?;
    let expansion = exp_expansion(&g, &hd).map_err(err)?;
    let zero = [c(0.0, 0.0); 2];
    let probe =
        error_scaling_probe(&expansion, &flow, &zero, &[c(0.04, 0.0), c(0.02, 0.0)], &default_scales(), DEFAULT_STEPS)
            .map_err(err)?;
    let slope = probe.slope.ok_or("no slope: errors at the noise floor")?;
    ensure(slope >= 2.8, format!("slope {slope:.3}"))?;
    let ratio =
        flow.convergence_ratio(&[c(0.03, 0.02), c(-0.03, 0.01)], &[c(0.08, 0.04), c(-0.04, 0.06)], 2).map_err(err)?;
    ensure((ratio - 16.0).abs() <= 3.2, format!("RK4 ratio {ratio:.3}"))?;
    Ok(format!("flat {flat_err:.1e}; FIX-B slope {slope:.3}; RK4 ratio {ratio:.3}"))
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_acgeom")).args(args).output().expect("binary runs")
}

fn cli_suite() -> Outcome {
    let dir = specs_dir();
    let dir_s = dir.to_str().ok_or("non-utf8 path")?;
    let mut runs = 0;
    for cmd in ["validate", "torsion", "normalize", "identities", "curvature", "decompose", "asymptotics", "geodesic"] {
        let a = run_cli(&[cmd, dir_s, "--json"]);
        let b = run_cli(&[cmd, dir_s, "--json"]);
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), format!("{cmd}: reports differ between runs"))?;
        ensure(a.status.code() == Some(0), format!("{cmd}: exit {:?} on passing specs", a.status.code()))?;
        runs += 1;
    }
    let mut specs = 0;
    for entry in std::fs::read_dir(&dir).map_err(err)? {
        let path = entry.map_err(err)?.path();
        let text = std::fs::read_to_string(&path).map_err(err)?;
        let spec = parse_manifold_spec(&text).map_err(err)?;
        let again = parse_manifold_spec(&serialize_manifold_spec(&spec)).map_err(err)?;
        ensure(spec == again, format!("{}: round trip changed the spec", path.display()))?;
        specs += 1;
    }
    let fixb = dir.join("fix_b.json");
    let fixb = fixb.to_str().ok_or("non-utf8 path")?;
    let fail = run_cli(&["geodesic", fixb, "--v", "0.5,0,0.5,0"]);
    ensure(fail.status.code() == Some(1), format!("failing row gives exit {:?}", fail.status.code()))?;
    let tmp = std::env::temp_dir().join(format!("acgeom-bad-{}.json", std::process::id()));
    std::fs::write(&tmp, r#"{"n": 2, "order": 4, "structure": {"kind": "B-normal", "entries": [{"alpha": [0], "beta": [0, 0], "k": 1, "l": 1, "re": 1, "im": 0}]}}"#)
        .map_err(err)?;
    let bad = run_cli(&["validate", tmp.to_str().ok_or("non-utf8 path")?]);
    let _ = std::fs::remove_file(&tmp);
    ensure(bad.status.code() == Some(2), format!("malformed spec gives exit {:?}", bad.status.code()))?;
    let msg = String::from_utf8_lossy(&bad.stderr);
    ensure(msg.contains("$.structure.entries[0].alpha"), format!("parse error without path: {msg}"))?;
    Ok(format!("{runs} commands byte-identical; {specs} specs round-trip; exit codes 0/1/2"))
}

fn main() {
    let suites: [(&str, fn() -> Outcome); 10] = [
        ("fundamental identities", identities_suite),
        ("structure constraint", structure_suite),
        ("normal form", normal_form_suite),
        ("torsion", torsion_suite),
        ("Chern / Levi-Civita decomposition", decomposition_suite),
        ("curvature", curvature_suite),
        ("special frame", special_frame_suite),
        ("connection and metric asymptotics", asymptotics_suite),
        ("geodesics", geodesic_suite),
        ("command line", cli_suite),
    ];
    let mut failed = 0;
    for (i, (name, suite)) in suites.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(suite).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
