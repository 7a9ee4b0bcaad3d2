//! Command-line front-end.
//!
//! Inputs are JSON, given inline (a value starting with `{` or `[`) or as a
//! file path. Real lists such as `--xs` are comma separated. Schemas:
//!
//! * `--spec` (scalar mean): `{"variant":"power","p":-1}` or `{"variant":"lse"}`.
//! * `--generator`: `{"variant":"power","p":2,"dim":3}`, `{"variant":"lse0","dim":2}`,
//!   `{"variant":"separable","axes":[{"variant":"lse"},{"variant":"power","p":0}]}`,
//!   `{"variant":"quadratic","q":[[2,0],[0,1]],"c":[0,0],"kappa":0}`,
//!   `{"variant":"neg_log_det","dim":2}`, `{"variant":"half_trace_square","dim":2}`,
//!   `{"variant":"mixture_negentropy","densities":[[0.5,0.5],[0.9,0.1]]}`.
//! * `--points`: array of points; a matrix point is its row-major flattening.
//! * SPD matrices: `{"dim":2,"entries":[2,1,1,2]}` (row-major) or `[[2,1],[1,2]]`.
//! * `--densities`: array of probability vectors.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

pub mod check;
pub mod format;

use std::ffi::OsString;
use std::fmt;
use std::fs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::averages::{dual_qaa, qaa, scalar_qam, ScalarMeanSpec, WeightVector};
use crate::divergences::{bregman_report, dual_bregman, fenchel_young_report, jeffreys_bregman, jensen_report, DivergenceReport};
use crate::dually_flat::{
    jensen_barycenter, left_centroid, lift_point, right_centroid, sample_geodesic, DfsPoint, GeodesicKind,
    BARYCENTER_MAX_ITER, BARYCENTER_TOL,
};
use crate::error::Error;
use crate::generators::{Generator, GeneratorSpec};
use crate::linalg::Point;
use crate::mixtures::geodesic::{DEFAULT_BVP_TOL, DEFAULT_MAX_SWEEPS};
use crate::mixtures::{
    alpha_geodesic, generalized_jsd, hjsd, jsd, jsd_entropy_form, nabla_alpha_jsd_with, qamix_with_normalizer,
    AlphaGeodesicConfig, DiscreteDensity, GeodesicSolver,
};
use crate::spd::{ahm_geometric, spd_geometric_closed, SpdMatrix, SpdRaw, AHM_MAX_ITER, AHM_TOL};
use format::{flatten_to_csv, to_json, Table};

#[derive(Debug, Parser)]
#[command(name = "qam", version, about = "Quasi-arithmetic averages, divergences, matrix means and mixtures")]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Output format (geodesic sampling defaults to csv, everything else to json).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Stopping tolerance of iterative solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted scalar quasi-arithmetic mean.
    Mean {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        xs: String,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// Quasi-arithmetic average of points under a generator's gradient map.
    Average {
        #[command(flatten)]
        set: PointSet,
        /// Treat the points as dual coordinates and average with the inverse map.
        #[arg(long)]
        dual: bool,
    },
    /// Divergence between two points.
    Divergence {
        #[arg(long)]
        generator: String,
        #[arg(long, value_enum, default_value = "bregman")]
        kind: DivergenceKind,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Sample a primal or dual geodesic.
    Geodesic {
        #[arg(long)]
        generator: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, value_enum, default_value = "primal")]
        kind: GeodesicKindArg,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Left or right Bregman centroid.
    Centroid {
        #[command(flatten)]
        set: PointSet,
        #[arg(long, value_enum, default_value = "right")]
        side: Side,
    },
    /// Jensen barycenter by fixed-point iteration.
    Barycenter {
        #[command(flatten)]
        set: PointSet,
        #[arg(long, default_value_t = BARYCENTER_MAX_ITER)]
        max_iter: usize,
    },
    /// Geometric mean of two SPD matrices.
    SpdGeomean {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, value_enum, default_value = "ahm")]
        method: SpdMethod,
        #[arg(long, default_value_t = AHM_MAX_ITER)]
        max_iter: usize,
    },
    /// Quasi-arithmetic mixture of densities.
    Mix {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        densities: String,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// Jensen-Shannon type divergences between two densities.
    ///
    /// With --alpha: the alpha-geodesic variant at --beta. With --g-spec: the
    /// entropy-mean variant with mixture mean --spec. With --spec alone: the
    /// quasi-arithmetic mixture variant. Otherwise the plain divergence.
    Jsd {
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        g_spec: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Sample the alpha-geodesic between two densities.
    SimplexGeodesic {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Number of BVP intervals (even, at least 16).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run a seeded property suite.
    Check {
        #[arg(value_enum)]
        suite: check::Suite,
    },
}

#[derive(Debug, Args)]
struct PointSet {
    #[arg(long)]
    generator: String,
    #[arg(long)]
    points: String,
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DivergenceKind {
    Bregman,
    FenchelYoung,
    Jeffreys,
    DualBregman,
    Jensen,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeodesicKindArg {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpdMethod {
    Ahm,
    Closed,
}

/// A failure tied to one input field.
#[derive(Debug)]
struct CliError {
    field: &'static str,
    message: String,
    code: i32,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl CliError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        CliError { field, message: message.into(), code: 2 }
    }
}

/// Maps a library error on `field` to exit code 3 when numerical, else 2.
fn lib(field: &'static str) -> impl Fn(Error) -> CliError {
    move |e| CliError { field, message: e.to_string(), code: if e.is_numerical() { 3 } else { 2 } }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered output plus an exit code for results that are written but still
/// count as failures (non-convergence).
struct Output {
    body: String,
    failure: Option<CliError>,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, failure: None }
    }
}

fn init_logging() {
    let level = match std::env::var("QAM_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    // repeated calls inside one process keep the first logger
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = command_name(&cli.command);
    let result = dispatch(&cli).and_then(|out| {
        write_output(cli.output.as_deref(), &out.body)?;
        Ok(out.failure)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(e)) | Err(e) => {
            eprintln!("qam {name}: {e}");
            e.code
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Mean { .. } => "mean",
        Command::Average { .. } => "average",
        Command::Divergence { .. } => "divergence",
        Command::Geodesic { .. } => "geodesic",
        Command::Centroid { .. } => "centroid",
        Command::Barycenter { .. } => "barycenter",
        Command::SpdGeomean { .. } => "spd-geomean",
        Command::Mix { .. } => "mix",
        Command::Jsd { .. } => "jsd",
        Command::SimplexGeodesic { .. } => "simplex-geodesic",
        Command::Check { .. } => "check",
    }
}

fn write_output(path: Option<&str>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| CliError::invalid("output", format!("cannot write {p}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn read_json<T: DeserializeOwned>(field: &'static str, raw: &str) -> CliResult<T> {
    let text = raw.trim_start();
    let text = if text.starts_with('{') || text.starts_with('[') {
        text.to_string()
    } else {
        fs::read_to_string(raw).map_err(|e| CliError::invalid(field, format!("cannot read {raw}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::invalid(field, e.to_string()))
}

fn parse_list(field: &'static str, raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::invalid(field, format!("'{}' is not a number: {e}", s.trim())))
        })
        .collect()
}

fn parse_point(field: &'static str, raw: &str) -> CliResult<Point> {
    let t = raw.trim_start();
    let v = if t.starts_with('[') { read_json::<Vec<f64>>(field, raw)? } else { parse_list(field, raw)? };
    Ok(DVector::from_vec(v))
}

fn parse_weights(raw: Option<&str>, n: usize) -> CliResult<WeightVector> {
    match raw {
        Some(r) => {
            let w = parse_list("w", r)?;
            if w.len() != n {
                return Err(CliError::invalid("w", format!("expected {n} weights, got {}", w.len())));
            }
            WeightVector::new(w).map_err(lib("w"))
        }
        None => WeightVector::uniform(n).map_err(lib("w")),
    }
}

fn parse_density(field: &'static str, raw: &str) -> CliResult<DiscreteDensity> {
    let v = parse_point(field, raw)?;
    DiscreteDensity::new(v.as_slice().to_vec()).map_err(lib(field))
}

fn parse_mean_spec(field: &'static str, raw: &str) -> CliResult<ScalarMeanSpec> {
    read_json(field, raw)
}

fn parse_generator(raw: &str) -> CliResult<Generator> {
    let spec: GeneratorSpec = read_json("generator", raw)?;
    spec.build().map_err(lib("generator"))
}

fn parse_points(raw: &str) -> CliResult<Vec<Point>> {
    let pts: Vec<Vec<f64>> = read_json("points", raw)?;
    if pts.is_empty() {
        return Err(CliError::invalid("points", "at least one point is required"));
    }
    Ok(pts.into_iter().map(DVector::from_vec).collect())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpdInput {
    Raw(SpdRaw),
    Rows(Vec<Vec<f64>>),
}

fn parse_spd(field: &'static str, raw: &str) -> CliResult<SpdMatrix> {
    match read_json::<SpdInput>(field, raw)? {
        SpdInput::Raw(r) => SpdMatrix::try_from(r).map_err(lib(field)),
        SpdInput::Rows(rows) => {
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                return Err(CliError::invalid(field, "matrix rows must form a nonempty square array"));
            }
            let flat: Vec<f64> = rows.concat();
            SpdMatrix::new(DMatrix::from_row_slice(n, n, &flat)).map_err(lib(field))
        }
    }
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

fn dfs_json(p: &DfsPoint) -> Value {
    json!({ "theta": vec_json(&p.theta), "eta": vec_json(&p.eta) })
}

fn render(value: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(value),
        OutputFormat::Csv => flatten_to_csv(value),
    }
}

fn positive_tol(tol: Option<f64>, default: f64) -> CliResult<f64> {
    match tol {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(CliError::invalid("tol", format!("must be positive, got {t}"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn dispatch(cli: &Cli) -> CliResult<Output> {
    let json_fmt = cli.format.unwrap_or(OutputFormat::Json);
    match &cli.command {
        Command::Mean { spec, xs, w } => {
            let spec = parse_mean_spec("spec", spec)?;
            let xs = parse_list("xs", xs)?;
            let w = parse_weights(w.as_deref(), xs.len())?;
            let m = scalar_qam(&spec, &xs, &w).map_err(lib("xs"))?;
            Ok(Output::ok(render(&json!(m), json_fmt)))
        }
        Command::Average { set, dual } => {
            let gen = parse_generator(&set.generator)?;
            let pts = parse_points(&set.points)?;
            let w = parse_weights(set.w.as_deref(), pts.len())?;
            let m = if *dual { dual_qaa(&gen, &pts, &w) } else { qaa(&gen, &pts, &w) }.map_err(lib("points"))?;
            Ok(Output::ok(render(&json!({ "mean": vec_json(&m) }), json_fmt)))
        }
        Command::Divergence { generator, kind, a, b } => {
            let gen = parse_generator(generator)?;
            let a = parse_point("a", a)?;
            let b = parse_point("b", b)?;
            let report = match kind {
                DivergenceKind::Bregman => bregman_report(&gen, &a, &b),
                DivergenceKind::FenchelYoung => fenchel_young_report(&gen, &a, &b),
                DivergenceKind::Jensen => jensen_report(&gen, &a, &b),
                DivergenceKind::Jeffreys => {
                    jeffreys_bregman(&gen, &a, &b).map(|value| DivergenceReport { value, parts: None })
                }
                DivergenceKind::DualBregman => {
                    dual_bregman(&gen, &a, &b).map(|value| DivergenceReport { value, parts: None })
                }
            }
            .map_err(lib("a"))?;
            Ok(Output::ok(render(&serde_json::to_value(report).expect("plain data"), json_fmt)))
        }
        Command::Geodesic { generator, p, q, kind, samples } => {
            let gen = parse_generator(generator)?;
            let p = lift_point(&gen, &parse_point("p", p)?).map_err(lib("p"))?;
            let q = lift_point(&gen, &parse_point("q", q)?).map_err(lib("q"))?;
            let kind = match kind {
                GeodesicKindArg::Primal => GeodesicKind::Primal,
                GeodesicKindArg::Dual => GeodesicKind::Dual,
            };
            let path = sample_geodesic(&gen, &p, &q, kind, *samples).map_err(lib("samples"))?;
            let body = match cli.format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => {
                    let d = p.theta.len();
                    let header = std::iter::once("t".to_string())
                        .chain((1..=d).map(|i| format!("theta{i}")))
                        .chain((1..=d).map(|i| format!("eta{i}")))
                        .collect();
                    let rows = path
                        .iter()
                        .map(|(t, pt)| std::iter::once(*t).chain(pt.theta.iter().copied()).chain(pt.eta.iter().copied()).collect())
                        .collect();
                    Table { header, rows }.to_csv()
                }
                OutputFormat::Json => {
                    let rows: Vec<Value> = path
                        .iter()
                        .map(|(t, pt)| json!({ "t": t, "theta": vec_json(&pt.theta), "eta": vec_json(&pt.eta) }))
                        .collect();
                    to_json(&json!({ "samples": rows }))
                }
            };
            Ok(Output::ok(body))
        }
        Command::Centroid { set, side } => {
            let gen = parse_generator(&set.generator)?;
            let pts = parse_points(&set.points)?;
            let w = parse_weights(set.w.as_deref(), pts.len())?;
            let lifted = pts.iter().map(|t| lift_point(&gen, t)).collect::<Result<Vec<_>, _>>().map_err(lib("points"))?;
            let c = match side {
                Side::Left => left_centroid(&gen, &lifted, &w),
                Side::Right => right_centroid(&gen, &lifted, &w),
            }
            .map_err(lib("points"))?;
            Ok(Output::ok(render(&dfs_json(&c), json_fmt)))
        }
        Command::Barycenter { set, max_iter } => {
            let gen = parse_generator(&set.generator)?;
            let pts = parse_points(&set.points)?;
            let w = parse_weights(set.w.as_deref(), pts.len())?;
            let tol = positive_tol(cli.tol, BARYCENTER_TOL)?;
            let trace = jensen_barycenter(&gen, &pts, &w, tol, *max_iter).map_err(lib("points"))?;
            let value = json!({
                "point": vec_json(trace.point()),
                "residual": trace.residual(),
                "residuals": trace.residuals,
                "iterations": trace.iterations(),
                "converged": trace.converged,
            });
            let failure = (!trace.converged).then(|| CliError {
                field: "max-iter",
                message: Error::NonConvergence { iterations: trace.iterations(), residual: trace.residual() }.to_string(),
                code: 3,
            });
            Ok(Output { body: render(&value, json_fmt), failure })
        }
        Command::SpdGeomean { p, q, method, max_iter } => {
            let p = parse_spd("p", p)?;
            let q = parse_spd("q", q)?;
            if p.dim() != q.dim() {
                return Err(CliError::invalid("q", format!("dimension {} does not match p ({})", q.dim(), p.dim())));
            }
            let (value, failure) = match method {
                SpdMethod::Closed => {
                    let g = spd_geometric_closed(&p, &q).map_err(lib("q"))?;
                    (json!({ "method": "closed", "limit": SpdRaw::from(g) }), None)
                }
                SpdMethod::Ahm => {
                    let tol = positive_tol(cli.tol, AHM_TOL)?;
                    let tr = ahm_geometric(&p, &q, tol, *max_iter).map_err(lib("q"))?;
                    let failure = (!tr.converged).then(|| CliError {
                        field: "max-iter",
                        message: Error::NonConvergence { iterations: tr.iterations(), residual: tr.final_gap() }.to_string(),
                        code: 3,
                    });
                    let value = json!({
                        "method": "ahm",
                        "limit": SpdRaw::from(tr.limit.clone()),
                        "iterations": tr.iterations(),
                        "final_gap": tr.final_gap(),
                        "gaps": tr.gaps,
                        "converged": tr.converged,
                    });
                    (value, failure)
                }
            };
            Ok(Output { body: render(&value, json_fmt), failure })
        }
        Command::Mix { spec, densities, w } => {
            let spec = parse_mean_spec("spec", spec)?;
            let raw: Vec<Vec<f64>> = read_json("densities", densities)?;
            let dens = raw
                .into_iter()
                .map(DiscreteDensity::new)
                .collect::<Result<Vec<_>, _>>()
                .map_err(lib("densities"))?;
            let w = parse_weights(w.as_deref(), dens.len())?;
            let mix = qamix_with_normalizer(&spec, &dens, &w).map_err(lib("densities"))?;
            let value = json!({ "density": mix.density.probs(), "normalizer": mix.normalizer });
            Ok(Output::ok(render(&value, json_fmt)))
        }
        Command::Jsd { p, q, spec, g_spec, alpha, beta } => {
            let p = parse_density("p", p)?;
            let q = parse_density("q", q)?;
            let value = if let Some(alpha) = alpha {
                let beta = beta.unwrap_or(0.5);
                let cfg = bvp_config(*alpha, None, cli.tol)?;
                let v = nabla_alpha_jsd_with(&p, &q, beta, &cfg).map_err(lib("alpha"))?;
                json!({ "kind": "alpha_geodesic", "alpha": alpha, "beta": beta, "value": v })
            } else if let Some(g) = g_spec {
                let f = match spec {
                    Some(s) => parse_mean_spec("spec", s)?,
                    None => ScalarMeanSpec::arithmetic(),
                };
                let g = parse_mean_spec("g-spec", g)?;
                let r = hjsd(&f, &g, &p, &q).map_err(lib("g-spec"))?;
                json!({ "kind": "entropy_mean", "value": r.value, "nonnegativity_guaranteed": r.nonnegativity_guaranteed })
            } else if let Some(s) = spec {
                let f = parse_mean_spec("spec", s)?;
                let v = generalized_jsd(&f, &p, &q).map_err(lib("spec"))?;
                json!({ "kind": "quasi_arithmetic", "value": v })
            } else {
                let v = jsd(&p, &q).map_err(lib("q"))?;
                let e = jsd_entropy_form(&p, &q).map_err(lib("q"))?;
                json!({ "kind": "plain", "value": v, "entropy_form": e })
            };
            Ok(Output::ok(render(&value, json_fmt)))
        }
        Command::SimplexGeodesic { alpha, p, q, samples, grid } => {
            let p = parse_density("p", p)?;
            let q = parse_density("q", q)?;
            if p.len() != q.len() {
                return Err(CliError::invalid("q", format!("support size {} does not match p ({})", q.len(), p.len())));
            }
            if *samples == 0 {
                return Err(CliError::invalid("samples", "must be positive"));
            }
            let cfg = bvp_config(*alpha, *grid, cli.tol)?;
            let path = alpha_geodesic(&p, &q, &cfg).map_err(lib("alpha"))?;
            log::info!("geodesic solved: residual {:e}, {} sweeps", path.residual, path.iterations);
            let mut rows = Vec::with_capacity(samples + 1);
            for k in 0..=*samples {
                let t = k as f64 / *samples as f64;
                let x = path.at(t).map_err(lib("samples"))?;
                rows.push(std::iter::once(t).chain(x.probs().iter().copied()).collect());
            }
            let body = match cli.format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => {
                    let header = std::iter::once("t".to_string()).chain((1..=p.len()).map(|i| format!("p{i}"))).collect();
                    Table { header, rows }.to_csv()
                }
                OutputFormat::Json => to_json(&json!({
                    "alpha": alpha,
                    "residual": path.residual,
                    "near_boundary": path.near_boundary,
                    "samples": rows,
                })),
            };
            Ok(Output::ok(body))
        }
        Command::Check { suite } => {
            let report = check::run_suite(*suite);
            Ok(Output::ok(render(&serde_json::to_value(report).expect("plain data"), json_fmt)))
        }
    }
}

/// Closed form at α = ±1 unless a grid is requested, else the BVP with
/// optional grid and tolerance overrides.
fn bvp_config(alpha: f64, grid: Option<usize>, tol: Option<f64>) -> CliResult<AlphaGeodesicConfig> {
    if grid.is_none() && tol.is_none() {
        return AlphaGeodesicConfig::new(alpha).map_err(lib("alpha"));
    }
    let solver = match GeodesicSolver::bvp() {
        GeodesicSolver::Bvp { grid_size, .. } => GeodesicSolver::Bvp {
            grid_size: grid.unwrap_or(grid_size),
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tol: positive_tol(tol, DEFAULT_BVP_TOL)?,
        },
        other => other,
    };
    AlphaGeodesicConfig::with_solver(alpha, solver).map_err(lib("grid"))
}
