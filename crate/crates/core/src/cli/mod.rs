//! Command-line front end: spec loading, dispatch, report emission.

mod commands;
mod report;
mod spec;

pub use commands::{run_command, Command, Flags, GeodesicOptions, RATIO_SLACK, SLOPE_BOUND};
pub use report::{Comparison, Report, Row, SCHEMA};
pub use spec::{
    parse_manifold_spec, serialize_manifold_spec, Entry, ManifoldSpec, MetricBlock, StructureBlock, StructureKind,
    MAX_ORDER, VALIDATION_TOL,
};

use crate::error::{GeomError, Result};
use clap::Parser;
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "acgeom", version, about = "Verification checks on jets of almost complex structures")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Spec file, or a directory whose `*.json` files are run as a batch.
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Override the jet order of the spec.
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
    /// Exact rational arithmetic where supported.
    #[arg(long)]
    pub exact: bool,
    /// Record wall time in the report.
    #[arg(long)]
    pub timing: bool,
    /// Base point as comma-separated `re,im` pairs.
    #[arg(long)]
    pub z: Option<String>,
    /// Initial velocity as comma-separated `re,im` pairs.
    #[arg(long)]
    pub v: Option<String>,
    /// Comma-separated scale ladder.
    #[arg(long)]
    pub scales: Option<String>,
    #[arg(long, default_value_t = crate::geodesic::DEFAULT_STEPS)]
    pub steps: usize,
}

fn numbers(flag: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| GeomError::Parse { path: flag.to_string(), message: format!("{t:?}: {e}") })
        })
        .collect()
}

/// `re,im,re,im,...` as complex numbers.
pub fn parse_complex_list(flag: &str, text: &str) -> Result<Vec<Complex64>> {
    let x = numbers(flag, text)?;
    if x.len() % 2 != 0 {
        return Err(GeomError::Parse { path: flag.to_string(), message: "expected re,im pairs".into() });
    }
    Ok(x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

impl Cli {
    pub fn flags(&self) -> Result<Flags> {
        let geodesic = GeodesicOptions {
            z: self.z.as_deref().map(|t| parse_complex_list("--z", t)).transpose()?,
            v: self.v.as_deref().map(|t| parse_complex_list("--v", t)).transpose()?,
            scales: self.scales.as_deref().map(|t| numbers("--scales", t)).transpose()?,
            steps: self.steps,
        };
        Ok(Flags { tol: self.tol, order: self.order, seed: self.seed, exact: self.exact, geodesic })
    }
}

fn fixture_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn load_spec(path: &Path) -> Result<ManifoldSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_manifold_spec(&text)
}

/// Loads and runs one spec file; load failures become a failed row.
pub fn run_file(cmd: Command, path: &Path, flags: &Flags, timing: bool) -> Report {
    let start = Instant::now();
    let mut report = match load_spec(path) {
        Ok(spec) => run_command(cmd, &spec, flags, &fixture_name(path)),
        Err(e) => {
            let mut r = Report::new(cmd.name(), fixture_name(path));
            r.push(Row::error("load spec", e));
            r
        }
    };
    if timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    report
}

/// Spec files of a batch directory in name order.
pub fn batch_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs the command line and returns the process exit code:
/// 0 when every row passes, 1 when some row fails, 2 on usage or input errors.
pub fn run(cli: &Cli, out: &mut impl std::io::Write) -> i32 {
    let flags = match cli.flags() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("acgeom: {e}");
            return 2;
        }
    };
    let reports = if cli.spec.is_dir() {
        let files = match batch_files(&cli.spec) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("acgeom: {}: {e}", cli.spec.display());
                return 2;
            }
        };
        files.par_iter().map(|p| run_file(cli.command, p, &flags, cli.timing)).collect::<Vec<_>>()
    } else {
        if let Err(e) = load_spec(&cli.spec) {
            eprintln!("acgeom: {}: {e}", cli.spec.display());
            return 2;
        }
        vec![run_file(cli.command, &cli.spec, &flags, cli.timing)]
    };
    let text = if cli.json {
        let body = if cli.spec.is_dir() {
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        } else {
            reports[0].to_json()
        };
        body + "\n"
    } else {
        reports.iter().map(Report::to_text).collect::<Vec<_>>().join("\n")
    };
    if out.write_all(text.as_bytes()).is_err() {
        return 2;
    }
    if reports.iter().all(Report::passed) {
        0
    } else {
        1
    }
}
