//! `vp`: volume-product checks from the command line.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! malformed input or an unsupported request.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use vp_core::bodies::{self, ConvexBody};
use vp_core::duality::polar;
use vp_core::functional::{self, AnalyticTag, GridFunction};
use vp_core::perturb;
use vp_core::products::{self, Method};
use vp_core::report::CheckReport;
use vp_core::runner::{self, CheckSpec, Format, Manifest, Params, Report, ReportRow, RunOutput, REPORT_VERSION};
use vp_core::suite::{self, SuiteConfig};
use vp_core::volume::{self, McEstimate};
use vp_core::Error;

#[derive(Parser)]
#[command(name = "vp", version, about = "Volume products of convex bodies: computations and inequality checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Re-judge single checks with this tolerance (same kind as the check's own).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Operations on a single body.
    Body {
        #[command(subcommand)]
        op: BodyOp,
    },
    /// Volume of a body.
    Volume(VolumeArgs),
    /// Mahler product vol(K) vol(K*).
    Mahler(VolumeArgs),
    /// Run one named check.
    Verify(VerifyArgs),
    /// Grid functions.
    Functional {
        #[command(subcommand)]
        op: FunctionalOp,
    },
    /// Upper bound on the Banach-Mazur distance between two bodies.
    BmDistance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 400)]
        iterations: usize,
    },
    /// Volume-product gap against distance to Hanner polytopes near the cube.
    Stability {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Every acceptance criterion with fixed seeds.
    PaperSuite {
        /// One tenth of the samples and trials.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// Run a manifest of checks.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand)]
enum BodyOp {
    /// Print the polar body in the same JSON schema.
    Polar {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Same as `vp volume`.
    Volume(VolumeArgs),
}

#[derive(Args)]
struct VolumeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "exact")]
    method: Method,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check name, or `batch` to run a manifest.
    check: String,
    /// Body file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Body for grid functions built from a body.
    #[arg(long)]
    body: Option<PathBuf>,
    /// Function: a name (gaussian, indicator, exp-neg-gauge, sinc2,
    /// indicatorft), inline JSON, or a file.
    #[arg(long = "fn")]
    function: Option<String>,
    /// Direction, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    #[arg(long)]
    p: Option<f64>,
    /// Profile for lemma34: tent, bump or power:q.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    /// Body for rho: cube or ball.
    #[arg(long)]
    ft_body: Option<String>,
    #[arg(long)]
    lattice_radius: Option<i64>,
    /// Hanner tree, e.g. "l1(leaf, linf(leaf, leaf))".
    #[arg(long)]
    tree: Option<String>,
    /// Manifest for `verify batch`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FunctionalOp {
    /// Sample a function on a grid and write its polar.
    Polar {
        /// gaussian, indicator or exp-neg-gauge.
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long)]
        body: Option<PathBuf>,
        /// A grid file instead of `--fn`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = functional::DEFAULT_EXTENT)]
        extent: f64,
        #[arg(long)]
        m: Option<usize>,
    },
}

/// Outcome of a command: `Some(pass)` for checks, `None` for computations.
type Outcome = Result<Option<bool>, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(None) | Ok(Some(true)) => ExitCode::SUCCESS,
        Ok(Some(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Body { op: BodyOp::Polar { input } } => {
            let k = read_body(input)?;
            emit(g, &serde_json::to_string_pretty(&polar(&k)?)?)?;
            Ok(None)
        }
        Command::Body { op: BodyOp::Volume(a) } | Command::Volume(a) => {
            let k = read_body(&a.input)?;
            let est = volume_by(&k, a.method, g)?;
            emit(g, &estimate_json(&est, a.method))?;
            Ok(None)
        }
        Command::Mahler(a) => {
            let k = read_body(&a.input)?;
            let est = products::mahler_estimate(&k, a.method, samples(g), seed(g))?;
            emit(g, &estimate_json(&est, a.method))?;
            Ok(None)
        }
        Command::Verify(v) => verify(v, g),
        Command::Functional { op: FunctionalOp::Polar { function, body, input, dim, extent, m } } => {
            let f = match (input, function) {
                (Some(path), _) => read_grid(path)?,
                (None, Some(name)) => {
                    let tag = analytic_tag(name, body.as_deref())?;
                    let dim = tag_dim(&tag, *dim);
                    GridFunction::from_tag(tag, dim, *extent, m.unwrap_or_else(|| functional::default_points(dim)))?
                }
                (None, None) => return Err(Error::Input("functional polar needs --fn or --in".into())),
            };
            let result = functional::polar_function(&f)?;
            if let Some(e) = result.sup_error_vs_analytic {
                eprintln!("sup error against the closed form: {e:e} (grid spacing {:e})", f.spacing());
            }
            emit(g, &serde_json::to_string(&result.polar)?)?;
            Ok(None)
        }
        Command::BmDistance { a, b, restarts, iterations } => {
            let (ka, kb) = (read_body(a)?, read_body(b)?);
            let cert = perturb::bm_distance_upper(&ka, &kb, *restarts, *iterations, seed(g))?;
            let out = json!({
                "d_upper": cert.d,
                "T": cert.t,
                "verified": cert.verified,
                "ratio_method": cert.ratio_method,
                "seed": seed(g),
            });
            emit(g, &serde_json::to_string_pretty(&out)?)?;
            Ok(None)
        }
        Command::Stability { dim, eps, trials } => {
            let result = perturb::stability_experiment(*dim, eps, *trials, seed(g))?;
            let mut table = String::from("dim,eps,trial,delta_p,d_hat_minus_1,ratio\n");
            for r in &result.rows {
                let ratio = r.ratio.map(|x| format!("{x:.17e}")).unwrap_or_default();
                table.push_str(&format!(
                    "{},{},{},{:.17e},{:.17e},{ratio}\n",
                    r.dim, r.eps, r.trial, r.delta_p, r.d_hat_minus_1
                ));
            }
            emit(g, &table)?;
            for r in &result.reports {
                eprintln!("{}", r.summary_line());
            }
            Ok(Some(result.reports.iter().all(|r| r.pass)))
        }
        Command::PaperSuite { quick, only } => paper_suite(g, *quick, only),
        Command::Run { manifest } => run_manifest(manifest, g),
    }
}

fn seed(g: &Global) -> u64 {
    g.seed.unwrap_or(0)
}

fn samples(g: &Global) -> u64 {
    g.samples.unwrap_or(runner::DEFAULT_SAMPLES)
}

fn emit(g: &Global, text: &str) -> Result<(), Error> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match &g.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_body(path: &Path) -> Result<ConvexBody, Error> {
    bodies::from_json(&read_text(path)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_grid(path: &Path) -> Result<GridFunction, Error> {
    let g: GridFunction = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    g.validate()?;
    Ok(g)
}

fn volume_by(k: &ConvexBody, method: Method, g: &Global) -> Result<McEstimate, Error> {
    match method {
        Method::Exact => Ok(McEstimate::exact(volume::volume(k)?)),
        Method::Mc => volume::volume_mc(k, samples(g), seed(g)),
        // The sphere formula applied to K*, whose polar is K.
        Method::Sphere => volume::polar_volume_sphere(&polar(k)?, samples(g), seed(g)),
    }
}

fn estimate_json(est: &McEstimate, method: Method) -> String {
    let v = json!({
        "value": est.value,
        "std_error": est.std_error,
        "samples": est.samples,
        "seed": est.seed,
        "method": method,
    });
    serde_json::to_string_pretty(&v).expect("json")
}

fn analytic_tag(name: &str, body: Option<&Path>) -> Result<AnalyticTag, Error> {
    let body = || {
        body.map(read_body)
            .unwrap_or_else(|| Err(Error::Input(format!("--fn {name} needs --body"))))
    };
    Ok(match name {
        "gaussian" => AnalyticTag::Gaussian,
        "indicator" => AnalyticTag::Indicator { body: body()? },
        "exp-neg-gauge" | "exp_neg_gauge" => AnalyticTag::ExpNegGauge { body: body()? },
        other => return Err(Error::Input(format!("unknown grid function {other:?} (gaussian|indicator|exp-neg-gauge)"))),
    })
}

fn tag_dim(tag: &AnalyticTag, dim: usize) -> usize {
    match tag {
        AnalyticTag::Gaussian => dim,
        AnalyticTag::Indicator { body } | AnalyticTag::ExpNegGauge { body } => body.dim(),
    }
}

/// The manifest `function` value for a `--fn` argument.
fn function_value(check: &str, v: &VerifyArgs) -> Result<Option<Value>, Error> {
    let Some(name) = &v.function else { return Ok(None) };
    if name.trim_start().starts_with('{') {
        return Ok(Some(serde_json::from_str(name)?));
    }
    let grid_check = matches!(check, "functional-santalo" | "functional-ball" | "involution");
    if Path::new(name).is_file() {
        let path = std::fs::canonicalize(name)?;
        return Ok(Some(if grid_check {
            Value::String(path.display().to_string())
        } else {
            serde_json::from_str(&read_text(&path)?)?
        }));
    }
    let dim = v.dim.unwrap_or(1);
    if grid_check {
        return Ok(Some(serde_json::to_value(analytic_tag(name, v.body.as_deref())?)?));
    }
    Ok(Some(match name.as_str() {
        "gaussian" => json!({"kind": "gaussian", "dim": dim, "scale": v.scale.unwrap_or(1.0)}),
        "sinc2" | "sinc2product" => json!({"kind": "sinc2product", "dim": dim}),
        "indicatorft" => json!({"kind": "indicatorft", "body": v.ft_body.as_deref().unwrap_or("cube"), "dim": dim}),
        other => return Err(Error::Input(format!("unknown function {other:?} (gaussian|sinc2|indicatorft)"))),
    }))
}

fn verify(v: &VerifyArgs, g: &Global) -> Outcome {
    if v.check == "batch" {
        let manifest = v.manifest.as_ref().ok_or_else(|| Error::Input("verify batch needs --manifest".into()))?;
        return run_manifest(manifest, g);
    }
    let body = match (&v.input, &v.body) {
        (Some(p), _) | (None, Some(p)) => Some(Value::String(std::fs::canonicalize(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?.display().to_string())),
        _ => None,
    };
    let ft_body = v
        .ft_body
        .as_deref()
        .map(|s| serde_json::from_value(Value::String(s.into())))
        .transpose()
        .map_err(|e| Error::Input(format!("--ft-body: {e}")))?;
    let spec = CheckSpec {
        check: v.check.clone(),
        body,
        function: function_value(&v.check, v)?,
        params: Params {
            samples: g.samples,
            method: None,
            x: v.x.clone(),
            matrix: None,
            p: v.p,
            profile: v.profile.clone(),
            dim: v.dim,
            extent: v.extent,
            m: v.m,
            lattice_radius: v.lattice_radius,
            ft_body,
            tree: v.tree.clone(),
            grid_points: None,
        },
        seed: Some(seed(g)),
    };
    let manifest = Manifest { checks: vec![spec], out: None, format: None };
    let prepared = runner::prepare(&manifest, Path::new("./command-line"))?;
    let mut reports = runner::execute(&prepared[0])?;
    for r in &mut reports {
        r.seed.get_or_insert(seed(g));
    }
    if let Some(tol) = g.tol {
        if !(tol >= 0.0) {
            return Err(Error::Input(format!("--tol must be nonnegative, got {tol}")));
        }
        reports = reports.into_iter().map(|r| rejudge(r, tol)).collect();
    }
    let pass = reports.iter().all(|r| r.pass);
    let text = match g.format.unwrap_or_default() {
        Format::Json if reports.len() == 1 => serde_json::to_string_pretty(&reports[0])?,
        Format::Json => serde_json::to_string_pretty(&reports)?,
        Format::Csv => {
            let rows = reports
                .into_iter()
                .map(|report| ReportRow { check_index: 0, check: v.check.clone(), report })
                .collect::<Vec<_>>();
            let wall_ms = vec![0; rows.len()];
            runner::to_csv(&RunOutput { report: Report { version: REPORT_VERSION.into(), rows }, wall_ms, warnings: vec![] })?
        }
    };
    emit(g, &text)?;
    Ok(Some(pass))
}

/// The same comparison under a different tolerance; forced failures stay failed.
fn rejudge(r: CheckReport, tol: f64) -> CheckReport {
    let forced = r.pass != CheckReport::new("", r.lhs, r.relation, r.rhs, r.tolerance, r.tol_kind).pass;
    let mut out = CheckReport::new(r.name, r.lhs, r.relation, r.rhs, tol, r.tol_kind);
    out.inputs_digest = r.inputs_digest;
    out.seed = r.seed;
    out.samples = r.samples;
    out.notes = r.notes;
    out.notes.push(format!("tolerance overridden from {:e}", r.tolerance));
    if forced {
        out.pass = false;
    }
    out
}

fn run_manifest(path: &Path, g: &Global) -> Outcome {
    let manifest = runner::read_manifest(path)?;
    let checks = runner::prepare(&manifest, path)?;
    let jobs = g.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = runner::run(&checks, jobs)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let format = g.format.or(manifest.format).unwrap_or_default();
    let target = g.out.clone().or_else(|| manifest.out.as_ref().map(|o| path.parent().unwrap_or(Path::new(".")).join(o)));
    match target {
        Some(p) => runner::write_report(&out, &p, format, jobs)?,
        None => match format {
            Format::Json => print!("{}", runner::to_json(&out.report)?),
            Format::Csv => print!("{}", runner::to_csv(&out)?),
        },
    }
    for row in out.report.rows.iter().filter(|r| !r.report.pass) {
        eprintln!("{}", row.report.summary_line());
    }
    Ok(Some(out.report.all_pass()))
}

fn paper_suite(g: &Global, quick: bool, only: &[usize]) -> Outcome {
    let cfg = SuiteConfig { seed: g.seed.unwrap_or(SuiteConfig::default().seed), quick };
    let ids: Vec<usize> = if only.is_empty() { (1..=suite::CRITERIA).collect() } else { only.to_vec() };
    let mut rows = Vec::new();
    let mut wall_ms = Vec::new();
    let mut pass = true;
    for id in ids {
        let start = std::time::Instant::now();
        let c = suite::criterion(id, &cfg)?;
        let ms = start.elapsed().as_millis() as u64;
        println!("{}", c.summary_line());
        for r in c.reports.iter().filter(|r| !r.pass) {
            println!("     {}", r.summary_line());
        }
        pass &= c.pass();
        for report in c.reports {
            rows.push(ReportRow { check_index: id, check: format!("criterion-{id}"), report });
            wall_ms.push(ms);
        }
    }
    if let Some(path) = &g.out {
        let out = RunOutput { report: Report { version: REPORT_VERSION.into(), rows }, wall_ms, warnings: vec![] };
        runner::write_report(&out, path, g.format.unwrap_or_default(), g.jobs.unwrap_or(0))?;
    }
    Ok(Some(pass))
}
