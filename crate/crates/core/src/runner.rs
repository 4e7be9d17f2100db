//! Manifest-driven batch runs with fixed-order, reproducible reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bodies::{self, ConvexBody};
use crate::duality;
use crate::error::{Error, Result};
use crate::functional::{self, AnalyticTag, GridFunction};
use crate::harmonic::{self, CatalogFunction, FtBody};
use crate::linalg::{Matrix, Vector};
use crate::perturb::{self, HannerTree};
use crate::products::{self, Method};
use crate::report::CheckReport;
use crate::volume;

pub const REPORT_VERSION: &str = "vp-report-v1";
pub const CSV_COLUMNS: [&str; 9] = ["name", "lhs", "rhs", "relation", "tolerance", "pass", "seed", "samples", "wall_ms"];
pub const DEFAULT_SAMPLES: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Input(format!("format must be json or csv, got {s:?}"))),
        }
    }
}

/// Check names accepted in manifests.
pub const CHECKS: [&str; 19] = [
    "santalo",
    "mahler-invariance",
    "lemma33",
    "lemma34",
    "lemma35",
    "zonoid",
    "rho",
    "eta",
    "poisson",
    "plancherel",
    "functional-santalo",
    "functional-ball",
    "involution",
    "ball",
    "santalo-reduction",
    "lemma52",
    "bipolar",
    "brunn",
    "hanner",
];

/// Optional per-check parameters; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub samples: Option<u64>,
    pub method: Option<Method>,
    /// Direction for `lemma35`.
    pub x: Option<Vector>,
    /// Linear map for `mahler-invariance`.
    pub matrix: Option<Matrix>,
    /// Concavity exponent for `lemma34`.
    pub p: Option<f64>,
    /// `lemma34` profile: `tent`, `bump` or `power:q` for `(1 - t)_+^q`.
    pub profile: Option<String>,
    pub dim: Option<usize>,
    pub extent: Option<f64>,
    pub m: Option<usize>,
    pub lattice_radius: Option<i64>,
    /// `rho` body: `cube` or `ball`.
    pub ft_body: Option<FtBody>,
    /// `hanner` tree, e.g. `l1(linf(leaf, leaf), leaf)`.
    pub tree: Option<String>,
    pub grid_points: Option<usize>,
}

/// One manifest entry as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: String,
    /// Body JSON inline, or a path relative to the manifest.
    #[serde(default)]
    pub body: Option<Value>,
    /// Catalog function or analytic grid tag inline, or a grid file path.
    #[serde(default)]
    pub function: Option<Value>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
enum Function {
    Catalog(CatalogFunction),
    Grid(GridFunction),
    Tag(AnalyticTag),
}

/// A manifest entry with every reference resolved.
#[derive(Debug, Clone)]
pub struct PreparedCheck {
    pub index: usize,
    pub check: String,
    pub seed: u64,
    body: Option<ConvexBody>,
    function: Option<Function>,
    params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Position of the producing check in the manifest.
    pub check_index: usize,
    pub check: String,
    #[serde(flatten)]
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.report.pass)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    /// Wall time per row, kept out of the deterministic report.
    pub wall_ms: Vec<u64>,
    pub warnings: Vec<String>,
}

fn field_error(file: &Path, field: &str, e: impl std::fmt::Display) -> Error {
    Error::Input(format!("{}: {field}: {e}", file.display()))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| field_error(path, "(file)", e))?;
    serde_json::from_str(&text).map_err(|e| field_error(path, "(manifest)", e))
}

fn load_body(value: &Value, base: &Path, manifest: &Path, field: &str) -> Result<ConvexBody> {
    match value {
        Value::String(rel) => {
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| field_error(manifest, field, format!("{}: {e}", path.display())))?;
            bodies::from_json(&text).map_err(|e| field_error(&path, "(body)", e))
        }
        _ => bodies::from_json(&value.to_string()).map_err(|e| field_error(manifest, field, e)),
    }
}

fn load_function(check: &str, value: &Value, base: &Path, manifest: &Path, field: &str) -> Result<Function> {
    let grid_check = matches!(check, "functional-santalo" | "functional-ball" | "involution");
    match value {
        Value::String(rel) if grid_check => {
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| field_error(manifest, field, format!("{}: {e}", path.display())))?;
            let g: GridFunction = serde_json::from_str(&text).map_err(|e| field_error(&path, "(grid)", e))?;
            g.validate().map_err(|e| field_error(&path, "(grid)", e))?;
            Ok(Function::Grid(g))
        }
        _ if grid_check => {
            let tag: AnalyticTag = serde_json::from_value(value.clone()).map_err(|e| field_error(manifest, field, e))?;
            Ok(Function::Tag(tag))
        }
        _ => {
            let f: CatalogFunction = serde_json::from_value(value.clone()).map_err(|e| field_error(manifest, field, e))?;
            f.validate().map_err(|e| field_error(manifest, field, e))?;
            Ok(Function::Catalog(f))
        }
    }
}

fn needs_body(check: &str) -> bool {
    matches!(
        check,
        "santalo"
            | "mahler-invariance"
            | "lemma33"
            | "lemma35"
            | "zonoid"
            | "ball"
            | "santalo-reduction"
            | "lemma52"
            | "bipolar"
            | "brunn"
    )
}

fn needs_function(check: &str) -> bool {
    matches!(check, "poisson" | "plancherel" | "functional-santalo" | "functional-ball" | "involution")
}

/// Resolve every reference so that nothing can fail to parse mid-run.
pub fn prepare(manifest: &Manifest, manifest_path: &Path) -> Result<Vec<PreparedCheck>> {
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    manifest
        .checks
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let field = |name: &str| format!("checks[{i}].{name}");
            if !CHECKS.contains(&spec.check.as_str()) {
                return Err(field_error(manifest_path, &field("check"), format!("unknown check {:?}", spec.check)));
            }
            let seed = spec
                .seed
                .ok_or_else(|| field_error(manifest_path, &field("seed"), "missing seed (seeds must be explicit)"))?;
            let body = spec.body.as_ref().map(|b| load_body(b, base, manifest_path, &field("body"))).transpose()?;
            if needs_body(&spec.check) && body.is_none() {
                return Err(field_error(manifest_path, &field("body"), format!("{} needs a body", spec.check)));
            }
            let function = spec
                .function
                .as_ref()
                .map(|f| load_function(&spec.check, f, base, manifest_path, &field("function")))
                .transpose()?;
            if needs_function(&spec.check) && function.is_none() {
                return Err(field_error(manifest_path, &field("function"), format!("{} needs a function", spec.check)));
            }
            Ok(PreparedCheck { index: i, check: spec.check.clone(), seed, body, function, params: spec.params.clone() })
        })
        .collect()
}

fn lemma34_profile(name: &str) -> Result<Box<dyn Fn(f64) -> f64 + Sync>> {
    match name {
        "tent" => Ok(Box::new(|t: f64| (1.0 - t).max(0.0))),
        "bump" => Ok(Box::new(|t: f64| (1.0 - t * t).max(0.0))),
        _ => {
            let q: f64 = name
                .strip_prefix("power:")
                .and_then(|q| q.parse().ok())
                .ok_or_else(|| Error::Input(format!("profile must be tent, bump or power:q, got {name:?}")))?;
            Ok(Box::new(move |t: f64| (1.0 - t).max(0.0).powf(q)))
        }
    }
}

fn grid_of(f: &Function, p: &Params) -> Result<GridFunction> {
    match f {
        Function::Grid(g) => Ok(g.clone()),
        Function::Tag(tag) => {
            let dim = match tag {
                AnalyticTag::Gaussian => p.dim.unwrap_or(2),
                AnalyticTag::Indicator { body } | AnalyticTag::ExpNegGauge { body } => body.dim(),
            };
            let m = p.m.unwrap_or_else(|| functional::default_points(dim));
            GridFunction::from_tag(tag.clone(), dim, p.extent.unwrap_or(functional::DEFAULT_EXTENT), m)
        }
        Function::Catalog(_) => Err(Error::Input("grid checks take an analytic tag or a grid file".into())),
    }
}

/// Execute one prepared check. Checks with a single outcome return one report.
pub fn execute(c: &PreparedCheck) -> Result<Vec<CheckReport>> {
    let p = &c.params;
    let samples = p.samples.unwrap_or(DEFAULT_SAMPLES);
    let body = || c.body.as_ref().ok_or_else(|| Error::Input(format!("{} needs a body", c.check)));
    let catalog = || match &c.function {
        Some(Function::Catalog(f)) => Ok(f),
        _ => Err(Error::Input(format!("{} needs a catalog function", c.check))),
    };
    let grid = || grid_of(c.function.as_ref().expect("prepared"), p);
    let one = |r: CheckReport| Ok(vec![r]);
    match c.check.as_str() {
        "santalo" => products::santalo_check(body()?, p.method.unwrap_or_default(), samples, c.seed),
        "mahler-invariance" => {
            let k = body()?;
            let t = p.matrix.clone().unwrap_or_else(|| {
                crate::catalog::random_matrix(&mut crate::rng::stream(c.seed, 0), k.dim())
            });
            one(products::mahler_invariance_check(k, &t, p.method.unwrap_or_default(), samples, c.seed)?)
        }
        "lemma33" => one(products::lemma33_identity(body()?, p.samples, c.seed)?),
        "lemma34" => {
            let f = lemma34_profile(p.profile.as_deref().unwrap_or("tent"))?;
            one(products::lemma34_check(&*f, p.p.unwrap_or(1.0), p.extent.unwrap_or(1.0), p.grid_points.unwrap_or(65))?)
        }
        "lemma35" => {
            let k = body()?;
            let x = p.x.clone().unwrap_or_else(|| crate::linalg::unit(k.dim(), 0));
            one(products::lemma35_check(k, &x, samples, c.seed)?)
        }
        "zonoid" => products::zonoid_recursion_check(body()?),
        "rho" => one(harmonic::rho_witness_check(p.ft_body.unwrap_or(FtBody::Cube), p.dim.unwrap_or(1))?),
        "eta" => one(harmonic::eta_cube_check(p.dim.unwrap_or(1), p.lattice_radius.unwrap_or(50))?),
        "poisson" => one(harmonic::poisson_check(catalog()?, p.lattice_radius.unwrap_or(10))?),
        "plancherel" => one(harmonic::plancherel_check(catalog()?)?),
        "functional-santalo" => one(functional::functional_santalo_check(&grid()?)?),
        "functional-ball" => one(functional::functional_ball_check(&grid()?)?),
        "involution" => one(functional::involution_check(&grid()?)?),
        "ball" => one(functional::ball_inequality_check(body()?, samples, c.seed)?),
        "santalo-reduction" => one(functional::santalo_reduction_check(body()?, samples, c.seed)?),
        "lemma52" => one(functional::lemma52_sections_check(body()?, p.samples.unwrap_or(2000) as usize, c.seed)?),
        "bipolar" => one(duality::bipolar_check(body()?, p.samples.unwrap_or(500) as usize, c.seed)?),
        "brunn" => {
            let k = body()?;
            let dir = p.x.clone().unwrap_or_else(|| crate::linalg::unit(k.dim(), 0));
            let profile = volume::section_profile(k, &dir, p.grid_points.unwrap_or(65), samples, c.seed)?;
            one(volume::brunn_concavity_check(&profile, k.dim())?)
        }
        "hanner" => {
            let tree = HannerTree::parse(p.tree.as_deref().ok_or_else(|| Error::Input("hanner needs params.tree".into()))?)?;
            one(perturb::hanner_mahler_check(&tree)?)
        }
        other => Err(Error::Input(format!("unknown check {other:?}"))),
    }
}

/// A failed row standing in for a check that raised an error at run time.
fn error_row(c: &PreparedCheck, e: &Error) -> CheckReport {
    CheckReport::new(c.check.clone(), f64::NAN, crate::report::Relation::Eq, f64::NAN, 0.0, crate::report::TolKind::Abs)
        .with_seed(c.seed)
        .fail(e.to_string())
}

/// Run prepared checks on up to `jobs` workers; rows keep manifest order.
pub fn run(checks: &[PreparedCheck], jobs: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    let results: Vec<(Vec<CheckReport>, u64)> = pool.install(|| {
        checks
            .par_iter()
            .map(|c| {
                let start = Instant::now();
                let reports = match execute(c) {
                    Ok(rs) => rs
                        .into_iter()
                        .map(|mut r| {
                            r.seed.get_or_insert(c.seed);
                            r
                        })
                        .collect(),
                    Err(e) => vec![error_row(c, &e)],
                };
                (reports, start.elapsed().as_millis() as u64)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut wall_ms = Vec::new();
    for (c, (reports, ms)) in checks.iter().zip(results) {
        for r in reports {
            rows.push(ReportRow { check_index: c.index, check: c.check.clone(), report: r });
            wall_ms.push(ms);
        }
    }
    let warnings = if checks.is_empty() { vec!["manifest has no checks".to_string()] } else { Vec::new() };
    Ok(RunOutput { report: Report { version: REPORT_VERSION.into(), rows }, wall_ms, warnings })
}

fn num(x: f64) -> String {
    if x.is_finite() { format!("{x:.17e}") } else { x.to_string() }
}

/// CSV with a version line, the fixed header and one row per report.
pub fn to_csv(out: &RunOutput) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Input(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for (row, ms) in out.report.rows.iter().zip(&out.wall_ms) {
        let r = &row.report;
        w.write_record([
            r.name.clone(),
            num(r.lhs),
            num(r.rhs),
            r.relation.symbol().to_string(),
            num(r.tolerance),
            r.pass.to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.samples.map(|s| s.to_string()).unwrap_or_default(),
            ms.to_string(),
        ])
        .map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
    Ok(format!("{REPORT_VERSION}\n{}", String::from_utf8(body).expect("csv is utf-8")))
}

pub fn to_json(report: &Report) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub created_unix_ms: u128,
    pub jobs: usize,
    pub wall_ms: Vec<u64>,
}

/// Write the report (and, for JSON, `<out>.meta.json` with timings).
pub fn write_report(out: &RunOutput, path: &Path, format: Format, jobs: usize) -> Result<()> {
    match format {
        Format::Csv => std::fs::write(path, to_csv(out)?)?,
        Format::Json => {
            std::fs::write(path, to_json(&out.report)?)?;
            let meta = Metadata {
                version: REPORT_VERSION.into(),
                created_unix_ms: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                jobs,
                wall_ms: out.wall_ms.clone(),
            };
            let mut meta_path = path.as_os_str().to_owned();
            meta_path.push(".meta.json");
            std::fs::write(PathBuf::from(meta_path), serde_json::to_string_pretty(&meta)? + "\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(text: &str) -> Manifest {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn santalo_on_the_cube() {
        let m = manifest(r#"{"checks":[{"check":"santalo","body":{"kind":"linfsum","parts":[{"kind":"interval","halfwidth":1},{"kind":"interval","halfwidth":1},{"kind":"interval","halfwidth":1}]},"seed":1}]}"#);
        let checks = prepare(&m, Path::new("m.json")).unwrap();
        let out = run(&checks, 2).unwrap();
        let upper = &out.report.rows[0].report;
        assert_eq!(upper.name, "santalo-upper");
        assert!((upper.lhs - 32.0 / 3.0).abs() < 1e-9);
        assert!((upper.rhs - (4.0 * std::f64::consts::PI / 3.0).powi(2)).abs() < 1e-12);
        assert!(out.report.all_pass());
    }

    #[test]
    fn missing_seed_is_an_error() {
        let m = manifest(r#"{"checks":[{"check":"eta","params":{"dim":1}}]}"#);
        let e = prepare(&m, Path::new("m.json")).unwrap_err().to_string();
        assert!(e.contains("checks[0].seed"), "{e}");
    }

    #[test]
    fn unknown_check_and_missing_file() {
        let m = manifest(r#"{"checks":[{"check":"nope","seed":1}]}"#);
        assert!(prepare(&m, Path::new("m.json")).unwrap_err().to_string().contains("checks[0].check"));
        let m = manifest(r#"{"checks":[{"check":"bipolar","body":"absent.json","seed":1}]}"#);
        assert!(prepare(&m, Path::new("/nonexistent/m.json")).unwrap_err().to_string().contains("checks[0].body"));
    }

    #[test]
    fn rows_keep_manifest_order_and_json_is_deterministic() {
        let m = manifest(
            r#"{"checks":[
                {"check":"eta","params":{"dim":2},"seed":3},
                {"check":"lemma34","params":{"profile":"bump"},"seed":4},
                {"check":"plancherel","function":{"kind":"gaussian","dim":1,"scale":1.0},"seed":5},
                {"check":"functional-santalo","function":{"kind":"gaussian"},"params":{"dim":1,"m":129},"seed":6},
                {"check":"hanner","params":{"tree":"l1(leaf, linf(leaf, leaf))"},"seed":7}
            ]}"#,
        );
        let checks = prepare(&m, Path::new("m.json")).unwrap();
        let a = to_json(&run(&checks, 1).unwrap().report).unwrap();
        let b = to_json(&run(&checks, 4).unwrap().report).unwrap();
        assert_eq!(a, b);
        let out = run(&checks, 3).unwrap();
        let idx: Vec<usize> = out.report.rows.iter().map(|r| r.check_index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        assert!(out.report.all_pass(), "{a}");
        let csv = to_csv(&out).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(REPORT_VERSION));
        assert_eq!(lines.next(), Some(CSV_COLUMNS.join(",").as_str()));
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn runtime_errors_become_failed_rows() {
        let m = manifest(r#"{"checks":[{"check":"poisson","function":{"kind":"indicatorft","body":"cube","dim":1},"seed":1}]}"#);
        let out = run(&prepare(&m, Path::new("m.json")).unwrap(), 1).unwrap();
        assert!(!out.report.all_pass());
        assert!(out.report.rows[0].report.notes[0].contains("capability"));
    }

    #[test]
    fn empty_manifest_warns() {
        let out = run(&[], 1).unwrap();
        assert!(out.report.rows.is_empty() && out.report.all_pass());
        assert_eq!(out.warnings.len(), 1);
    }
}
