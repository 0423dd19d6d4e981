use acgeom::cli::{parse_manifold_spec, run_command, Command as Cmd, Flags, Report, SCHEMA};
use std::path::{Path, PathBuf};
use std::process::Command;

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn acgeom(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_acgeom")).args(args).output().expect("binary runs")
}

fn load(name: &str) -> acgeom::cli::ManifoldSpec {
    parse_manifold_spec(&std::fs::read_to_string(spec_path(name)).unwrap()).unwrap()
}

#[test]
fn identities_on_j0_are_seven_zero_rows() {
    let r = run_command(Cmd::Identities, &load("fix_j0.json"), &Flags::default(), "fix_j0.json");
    assert_eq!(r.rows.len(), 7);
    assert!(r.rows.iter().all(|row| row.value == Some(0.0) && row.pass));
}

#[test]
fn curvature_on_fixb_reports_the_origin_value() {
    let r = run_command(Cmd::Curvature, &load("fix_b.json"), &Flags::default(), "fix_b.json");
    assert!(r.passed());
    let row = r.rows.iter().find(|row| row.check_name.contains("origin formula")).unwrap();
    assert!(row.detail.as_deref().unwrap().contains("C^{2,2}_{1,1}(0) = 0.050000+0.000000i"));
    let comps = r.data.as_ref().unwrap()["c_origin"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert!((comps[0]["value"][0].as_f64().unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn geodesic_on_fixb_has_a_slope_row() {
    let r = run_command(Cmd::Geodesic, &load("fix_b.json"), &Flags::default(), "fix_b.json");
    let row = r.rows.iter().find(|row| row.check_name.contains("slope")).unwrap();
    assert!(row.pass && row.value.unwrap() >= 2.8);
    let scales = r.data.as_ref().unwrap()["scales"].as_array().unwrap();
    assert_eq!(scales.len(), 4);
    assert!(scales[0]["slope_partial"].is_null());
}

#[test]
fn torsion_on_fixb_reports_nbar() {
    let r = run_command(Cmd::Torsion, &load("fix_b.json"), &Flags::default(), "fix_b.json");
    assert!(r.passed());
    let nbar = &r.data.as_ref().unwrap()["nbar_origin"][0];
    assert_eq!((nbar["r"].as_u64(), nbar["k"].as_u64(), nbar["l"].as_u64()), (Some(1), Some(1), Some(2)));
    assert!((nbar["value"][0].as_f64().unwrap() + 0.05).abs() < 1e-12);
    assert!((nbar["value"][1].as_f64().unwrap() - 0.15).abs() < 1e-12);
}

#[test]
fn single_file_json_round_trips_and_is_stable() {
    let p = spec_path("fix_b.json");
    let a = acgeom(&["decompose", p.to_str().unwrap(), "--json"]);
    let b = acgeom(&["decompose", p.to_str().unwrap(), "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let r = Report::from_json(&text).unwrap();
    assert_eq!(r.schema, SCHEMA);
    assert_eq!(r.to_json() + "\n", text);
    assert!(r.wall_time.is_none());
}

#[test]
fn timing_is_opt_in() {
    let p = spec_path("fix_j0.json");
    let out = acgeom(&["validate", p.to_str().unwrap(), "--json", "--timing"]);
    let r = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(r.wall_time.is_some());
}

#[test]
fn batch_mode_runs_every_spec_in_name_order() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fix_j0.json", "fix_b.json"] {
        std::fs::copy(spec_path(name), dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let out = acgeom(&["validate", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: Vec<Report> = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.fixture.as_str()).collect();
    assert_eq!(names, ["fix_b.json", "fix_j0.json"]);
}

#[test]
fn a_broken_file_in_a_batch_fails_its_report_only() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(spec_path("fix_j0.json"), dir.path().join("a.json")).unwrap();
    std::fs::write(dir.path().join("b.json"), "{\"n\": 2}").unwrap();
    let out = acgeom(&["validate", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: Vec<Report> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(reports[0].passed());
    assert!(!reports[1].passed());
    assert!(reports[1].rows[0].detail.as_deref().unwrap().contains("order"));
}

#[test]
fn text_output_is_a_table() {
    let p = spec_path("fix_j0.json");
    let out = acgeom(&["validate", p.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with(SCHEMA));
    assert!(lines[1].starts_with("check"));
    assert!(lines[2..].iter().all(|l| l.contains("PASS")));
}

#[test]
fn exit_codes() {
    let p = spec_path("fix_b.json");
    assert_eq!(acgeom(&["torsion", p.to_str().unwrap()]).status.code(), Some(0));
    // leaves the trust radius: rendered as a failed row
    assert_eq!(acgeom(&["geodesic", p.to_str().unwrap(), "--v", "0.5,0,0.5,0"]).status.code(), Some(1));
    assert_eq!(acgeom(&["geodesic", p.to_str().unwrap(), "--v", "0.5"]).status.code(), Some(2));
    assert_eq!(acgeom(&["validate", "/nonexistent/spec.json"]).status.code(), Some(2));
}

#[test]
fn order_override() {
    let mut flags = Flags::default();
    flags.order = Some(3);
    let r = run_command(Cmd::Normalize, &load("fix_b.json"), &flags, "fix_b.json");
    assert!(r.passed());
    assert!(r.rows[0].check_name.ends_with("order 3"));
}
