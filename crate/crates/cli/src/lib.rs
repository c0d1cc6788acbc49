//! Batch front end for `cq-radius`: reads a channel file or a preset, runs one
//! computation and writes CSV or JSON.
//!
//! Exit codes: 0 success, 1 other failures (including a failed `verify`),
//! 2 schema or argument errors, 3 solver non-convergence, 4 resource caps.

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cq_radius::center::{
    closed_form_center_z1, divergence_radius, holevo_quantity, solve_center_d, solve_center_qbar,
    solve_center_tsallis, weighted_radius_beta, SolverOptions,
};
use cq_radius::channel::parse_channel_json;
use cq_radius::divergence::{d_alpha_z, d_hat, d_max, tsallis};
use cq_radius::exponent::{cutoff_rate, exponent_curve, rate_grid, ExponentCurve, ExponentKind};
use cq_radius::{
    sampling, verify, CenterResult, Error, GcqChannel, InputDistribution, RenyiParams, ZParam,
};
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_SCHEMA: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("solver did not converge for alpha = {alpha}, z = {z}: {detail}")]
    NonConvergence {
        alpha: f64,
        z: String,
        detail: String,
    },
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{failed} of {total} properties violated")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Io(_) | CliError::Numerical(_) | CliError::VerifyFailed { .. } => {
                EXIT_FAILURE
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema(_)
            | Error::Domain(_)
            | Error::DimensionMismatch { .. }
            | Error::NotPsd { .. } => CliError::Schema(e.to_string()),
            Error::NonConvergence { alpha, z, detail } => {
                CliError::NonConvergence { alpha, z, detail }
            }
            Error::ResourceLimit(_) => CliError::Resource(e.to_string()),
            Error::SingularInput(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    /// `D_{α,z}` (Umegaki at `α = 1`).
    D,
    Tsallis,
    /// `D̂_{α,z}` (normalized-trace form).
    DHat,
    DMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterKind {
    D,
    Qbar,
    Tsallis,
    /// Power-mean closed form at `z = 1`.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Divergence {
        alpha: f64,
        z: Option<ZParam>,
        measure: Measure,
    },
    Center {
        alpha: f64,
        z: Option<ZParam>,
        kind: CenterKind,
    },
    Chi {
        alpha: f64,
        z: Option<ZParam>,
        beta: Option<f64>,
        radius: bool,
    },
    ExponentCurve {
        kind: ExponentKind,
        rate_range: RateRange,
    },
    Cutoff {
        kappa: f64,
    },
    Verify,
}

/// One fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: InputSource,
    pub units: Units,
    pub seed: u64,
    /// Standard output when absent.
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command, input: InputSource) -> Self {
        Self {
            command,
            input,
            units: Units::Nats,
            seed: 42,
            output_path: None,
            format: Format::Csv,
        }
    }
}

/// Command-line grammar.
#[derive(Debug, Parser)]
#[command(
    name = "cq-radius",
    version,
    about = "α-z Rényi divergences, weighted centers and coding exponents of cq channels"
)]
pub struct Cli {
    #[command(subcommand)]
    command: CliCommand,

    /// Channel JSON file, or a preset name when no such file exists.
    #[arg(long, global = true)]
    input: Option<String>,

    /// Built-in channel: `noiseless:d`, `random` or `random:d:k:seed`.
    #[arg(long, global = true, conflicts_with = "input")]
    preset: Option<String>,

    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    units: Units,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
struct AlphaZ {
    #[arg(long)]
    alpha: f64,
    /// Positive real or `inf`; defaults to `alpha`.
    #[arg(long, value_parser = parse_z)]
    z: Option<ZParam>,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// `D(W(x)‖W(y))` for every ordered pair of outputs and `D(W(x)‖W(P))`.
    Divergence {
        #[command(flatten)]
        az: AlphaZ,
        #[arg(long, value_enum, default_value_t = Measure::D)]
        measure: Measure,
    },
    /// The `P`-weighted center and radius.
    Center {
        #[command(flatten)]
        az: AlphaZ,
        #[arg(long, value_enum, default_value_t = CenterKind::D)]
        kind: CenterKind,
    },
    /// The `P`-weighted radius `χ_{α,z}`, its `(P, β)` variant, or the divergence radius.
    Chi {
        #[command(flatten)]
        az: AlphaZ,
        #[arg(long)]
        beta: Option<f64>,
        /// Maximize over input distributions instead of fixing `P`.
        #[arg(long, conflicts_with = "beta")]
        radius: bool,
    },
    /// An exponent on an evenly spaced rate grid (rates in nats).
    ExponentCurve {
        #[arg(long, default_value = "sc")]
        kind: ExponentKind,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// The cutoff rate `C_κ`.
    Cutoff {
        #[arg(long)]
        kappa: f64,
    },
    /// Runs every property check on the channel and on seeded random instances.
    Verify,
}

fn parse_z(s: &str) -> Result<ZParam, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(ZParam::Infinite),
        t => t
            .parse::<f64>()
            .map(ZParam::Finite)
            .map_err(|e| format!("{s:?}: {e}")),
    }
}

impl Cli {
    pub fn into_config(self) -> RunConfig {
        let input = match (self.preset, self.input) {
            (Some(name), _) => InputSource::Preset(name),
            (None, Some(s)) if !Path::new(&s).exists() && looks_like_preset(&s) => {
                InputSource::Preset(s)
            }
            (None, Some(s)) => InputSource::File(PathBuf::from(s)),
            (None, None) => InputSource::Preset("random".into()),
        };
        let command = match self.command {
            CliCommand::Divergence { az, measure } => Command::Divergence {
                alpha: az.alpha,
                z: az.z,
                measure,
            },
            CliCommand::Center { az, kind } => Command::Center {
                alpha: az.alpha,
                z: az.z,
                kind,
            },
            CliCommand::Chi { az, beta, radius } => Command::Chi {
                alpha: az.alpha,
                z: az.z,
                beta,
                radius,
            },
            CliCommand::ExponentCurve {
                kind,
                rmin,
                rmax,
                steps,
            } => Command::ExponentCurve {
                kind,
                rate_range: RateRange {
                    min: rmin,
                    max: rmax,
                    steps,
                },
            },
            CliCommand::Cutoff { kappa } => Command::Cutoff { kappa },
            CliCommand::Verify => Command::Verify,
        };
        RunConfig {
            command,
            input,
            units: self.units,
            seed: self.seed,
            output_path: self.output,
            format: self.format,
        }
    }
}

fn looks_like_preset(s: &str) -> bool {
    s.starts_with("noiseless:") || s == "random" || s.starts_with("random:")
}

/// Channel and input distribution; files without a distribution get the uniform one.
pub fn load_input(source: &InputSource) -> Result<(GcqChannel, InputDistribution), CliError> {
    match source {
        InputSource::Preset(name) => Ok(sampling::preset(name)?),
        InputSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let (w, p) = parse_channel_json(&text).map_err(|e| CliError::from(e).prefixed(path))?;
            let p = match p {
                Some(p) => p,
                None => InputDistribution::uniform(w.symbols().map(String::from))?,
            };
            Ok((w, p))
        }
    }
}

impl CliError {
    fn prefixed(self, path: &Path) -> Self {
        match self {
            CliError::Schema(m) => CliError::Schema(format!("{}: {m}", path.display())),
            CliError::Resource(m) => CliError::Resource(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

/// Floating-point text with 12 significant digits; `inf`, `-inf` and `nan` otherwise.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp) as usize, v))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Inverse of [`format_number`].
pub fn parse_number(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self, scale: f64) -> String {
        match self {
            Cell::Num(v) => format_number(v / scale),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n', '\r']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self, scale: f64) -> Value {
        match self {
            Cell::Num(v) => {
                let s = format_number(v / scale);
                match s.parse::<f64>() {
                    Ok(x) if x.is_finite() => json!(x),
                    _ => Value::String(s),
                }
            }
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Rows under a fixed header; `nats` columns are rescaled in bits mode.
#[derive(Debug, Clone, Default)]
struct Table {
    columns: Vec<(String, bool)>,
    rows: Vec<Vec<Cell>>,
    meta: Vec<(String, Value)>,
}

impl Table {
    fn new(columns: &[(&str, bool)]) -> Self {
        Self {
            columns: columns.iter().map(|&(c, n)| (c.to_string(), n)).collect(),
            ..Self::default()
        }
    }

    fn render(&self, format: Format, units: Units) -> String {
        let scale = |nats: bool| {
            if nats && units == Units::Bits {
                LN_2
            } else {
                1.0
            }
        };
        match format {
            Format::Csv => {
                let mut out = self
                    .columns
                    .iter()
                    .map(|(c, _)| c.as_str())
                    .collect::<Vec<_>>()
                    .join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .zip(&self.columns)
                        .map(|(cell, (_, nats))| cell.csv(scale(*nats)))
                        .collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let mut meta = serde_json::Map::new();
                meta.insert(
                    "units".into(),
                    json!(if units == Units::Bits { "bits" } else { "nats" }),
                );
                for (k, v) in &self.meta {
                    meta.insert(k.clone(), v.clone());
                }
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Array(
                            row.iter()
                                .zip(&self.columns)
                                .map(|(c, (_, n))| c.json(scale(*n)))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = json!({
                    "meta": meta,
                    "columns": self.columns.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>(),
                    "rows": rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Curve data with columns `R`, `value`, `argmax_alpha`.
pub fn emit_curve(curve: &ExponentCurve, format: Format, units: Units) -> Result<String, CliError> {
    if curve.rates.is_empty() {
        return Err(CliError::Schema("empty rate grid: nothing to write".into()));
    }
    let mut t = Table::new(&[("R", true), ("value", true), ("argmax_alpha", false)]);
    for ((&r, &v), &a) in curve
        .rates
        .iter()
        .zip(&curve.values)
        .zip(&curve.maximizing_alpha)
    {
        t.rows.push(vec![Cell::Num(r), Cell::Num(v), Cell::Num(a)]);
    }
    let scale = if units == Units::Bits { LN_2 } else { 1.0 };
    t.meta.push(("kind".into(), json!(curve.kind.to_string())));
    t.meta.push(("definition".into(), json!(curve.params)));
    t.meta.push((
        "alpha_floor_rates".into(),
        Value::Array(
            curve
                .floor_hits
                .iter()
                .map(|r| Cell::Num(*r).json(scale))
                .collect(),
        ),
    ));
    Ok(t.render(format, units))
}

/// Output of one invocation before it is written.
#[derive(Debug)]
pub struct Artifact {
    /// Written to the output path, or to standard output without one.
    pub text: String,
    /// Human-readable report for standard output.
    pub console: Option<String>,
    /// A failure reported after the artifact is written.
    pub deferred: Option<CliError>,
}

impl Artifact {
    fn plain(text: String) -> Self {
        Self {
            text,
            console: None,
            deferred: None,
        }
    }
}

fn params_for(alpha: f64, z: Option<ZParam>) -> Result<RenyiParams, CliError> {
    Ok(RenyiParams::new(alpha, z.unwrap_or(ZParam::Finite(alpha)))?)
}

fn non_convergence(params: RenyiParams, result: &CenterResult) -> Option<CliError> {
    (!result.converged).then(|| CliError::NonConvergence {
        alpha: params.alpha(),
        z: params.z().to_string(),
        detail: format!(
            "residual {:e} after {} iterations",
            result.residual, result.iterations
        ),
    })
}

/// Computes the artifact for `config` without touching the file system beyond reading the input.
pub fn render(config: &RunConfig) -> Result<Artifact, CliError> {
    let (w, p) = load_input(&config.input)?;
    match &config.command {
        Command::Divergence { alpha, z, measure } => {
            divergence_table(&w, &p, params_for(*alpha, *z)?, *measure)
                .map(|t| Artifact::plain(t.render(config.format, config.units)))
        }
        Command::Center { alpha, z, kind } => {
            center_artifact(&w, &p, params_for(*alpha, *z)?, *kind, config)
        }
        Command::Chi {
            alpha,
            z,
            beta,
            radius,
        } => chi_artifact(&w, &p, params_for(*alpha, *z)?, *beta, *radius, config),
        Command::ExponentCurve { kind, rate_range } => {
            let rates = rate_grid(rate_range.min, rate_range.max, rate_range.steps)?;
            let curve = exponent_curve(&w, &p, *kind, &rates)?;
            emit_curve(&curve, config.format, config.units).map(Artifact::plain)
        }
        Command::Cutoff { kappa } => {
            let value = cutoff_rate(&w, &p, *kappa)?;
            let mut t = Table::new(&[("kappa", false), ("alpha", false), ("value", true)]);
            t.rows.push(vec![
                Cell::Num(*kappa),
                Cell::Num(1.0 / (1.0 - kappa)),
                Cell::Num(value),
            ]);
            Ok(Artifact::plain(t.render(config.format, config.units)))
        }
        Command::Verify => verify_artifact(&w, &p, config),
    }
}

fn divergence_table(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    measure: Measure,
) -> Result<Table, CliError> {
    let nats = measure != Measure::Tsallis;
    let mut t = Table::new(&[
        ("rho", false),
        ("sigma", false),
        ("alpha", false),
        ("z", false),
        ("value", nats),
    ]);
    let avg = w.average_output(p)?;
    let mut targets: Vec<(String, _)> = w
        .outputs()
        .map(|(s, o)| (s.to_string(), o.clone()))
        .collect();
    targets.push(("W(P)".to_string(), avg));
    for (x, rho) in w.outputs() {
        for (y, sigma) in &targets {
            let v = match measure {
                Measure::D => d_alpha_z(rho, sigma, params)?,
                Measure::Tsallis => tsallis(rho, sigma, params)?,
                Measure::DHat => d_hat(rho, sigma, params)?,
                Measure::DMax => d_max(rho, sigma)?,
            };
            t.rows.push(vec![
                Cell::Text(x.to_string()),
                Cell::Text(y.clone()),
                Cell::Num(params.alpha()),
                Cell::Num(params.z().to_f64()),
                Cell::Num(v.to_f64()),
            ]);
        }
    }
    t.meta.push((
        "measure".into(),
        json!(format!("{measure:?}").to_lowercase()),
    ));
    Ok(t)
}

fn center_artifact(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    kind: CenterKind,
    config: &RunConfig,
) -> Result<Artifact, CliError> {
    let opts = SolverOptions::default();
    let (result, mi) = match kind {
        CenterKind::D => (solve_center_d(w, p, params, opts)?, None),
        CenterKind::Qbar => {
            let q = solve_center_qbar(w, p, params, opts)?;
            (q.result, Some(q.mutual_information))
        }
        CenterKind::Tsallis => (solve_center_tsallis(w, p, params, opts)?, None),
        CenterKind::ClosedForm => {
            if params.z() != ZParam::Finite(1.0) {
                return Err(CliError::Schema(
                    "the closed-form center needs z = 1".into(),
                ));
            }
            let q = closed_form_center_z1(w, p, params.alpha())?;
            (q.result, Some(q.mutual_information))
        }
    };
    let value_in_nats = kind == CenterKind::D;
    let mut columns: Vec<(String, bool)> = vec![
        ("kind".into(), false),
        ("alpha".into(), false),
        ("z".into(), false),
        ("value".into(), value_in_nats),
        ("iterations".into(), false),
        ("residual".into(), false),
        ("converged".into(), false),
        ("method".into(), false),
        ("heuristic".into(), false),
    ];
    let method = serde_json::to_value(result.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let mut row = vec![
        Cell::Text(format!("{kind:?}").to_lowercase()),
        Cell::Num(params.alpha()),
        Cell::Num(params.z().to_f64()),
        Cell::Num(result.value),
        Cell::Int(result.iterations as u64),
        Cell::Num(result.residual),
        Cell::Bool(result.converged),
        Cell::Text(method),
        Cell::Bool(result.heuristic),
    ];
    if let Some(mi) = mi {
        columns.push(("mutual_information".into(), true));
        row.push(Cell::Num(mi));
    }
    let m = result.center.matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            columns.push((format!("center_{i}_{j}_re"), false));
            columns.push((format!("center_{i}_{j}_im"), false));
            row.push(Cell::Num(m[(i, j)].re));
            row.push(Cell::Num(m[(i, j)].im));
        }
    }
    let t = Table {
        columns,
        rows: vec![row],
        meta: Vec::new(),
    };
    Ok(Artifact {
        text: t.render(config.format, config.units),
        console: None,
        deferred: non_convergence(params, &result),
    })
}

fn chi_artifact(
    w: &GcqChannel,
    p: &InputDistribution,
    params: RenyiParams,
    beta: Option<f64>,
    radius: bool,
    config: &RunConfig,
) -> Result<Artifact, CliError> {
    let mut deferred = None;
    let mut columns = vec![
        ("alpha", false),
        ("z", false),
        ("beta", false),
        ("value", true),
    ];
    let mut row = vec![
        Cell::Num(params.alpha()),
        Cell::Num(params.z().to_f64()),
        Cell::Num(beta.unwrap_or(1.0)),
    ];
    let mut names = Vec::new();
    if radius {
        let r = divergence_radius(w, params, 1e-9)?;
        if !r.converged {
            deferred = Some(CliError::NonConvergence {
                alpha: params.alpha(),
                z: params.z().to_string(),
                detail: format!("radius gap {:e} after {} iterations", r.gap, r.iterations),
            });
        }
        row[2] = Cell::Num(f64::INFINITY);
        row.push(Cell::Num(r.radius));
        for (s, wt) in r.worst_input.iter() {
            names.push(format!("p_{s}"));
            row.push(Cell::Num(wt));
        }
    } else if let Some(b) = beta {
        row.push(Cell::Num(weighted_radius_beta(w, p, params, b, 1e-9)?));
    } else if params.is_one() {
        row.push(Cell::Num(holevo_quantity(w, p)?.0));
    } else {
        let c = solve_center_d(w, p, params, SolverOptions::default())?;
        deferred = non_convergence(params, &c);
        row.push(Cell::Num(c.value));
    }
    columns.extend(names.iter().map(|n| (n.as_str(), false)));
    let mut t = Table::new(&columns);
    t.rows.push(row);
    Ok(Artifact {
        text: t.render(config.format, config.units),
        console: None,
        deferred,
    })
}

/// Identical configurations must give byte-identical artifacts.
fn determinism_check(config: &RunConfig) -> verify::PropertyCheck {
    let probes = [
        Command::Divergence {
            alpha: 2.0,
            z: Some(ZParam::Finite(1.5)),
            measure: Measure::D,
        },
        Command::Center {
            alpha: 2.0,
            z: None,
            kind: CenterKind::D,
        },
        Command::ExponentCurve {
            kind: ExponentKind::StrongConverse,
            rate_range: RateRange {
                min: 0.2,
                max: 1.0,
                steps: 3,
            },
        },
    ];
    let mut mismatches = Vec::new();
    for command in probes {
        for format in [Format::Csv, Format::Json] {
            let c = RunConfig {
                command: command.clone(),
                format,
                output_path: None,
                ..config.clone()
            };
            let a = render(&c).map(|a| a.text).map_err(|e| e.to_string());
            let b = render(&c).map(|a| a.text).map_err(|e| e.to_string());
            if a != b {
                mismatches.push(format!("{command:?} as {format:?}"));
            }
        }
    }
    verify::PropertyCheck {
        module: "cli".into(),
        name: "determinism".into(),
        passed: mismatches.is_empty(),
        worst: mismatches.len() as f64,
        tolerance: 0.0,
        detail: if mismatches.is_empty() {
            "repeated runs are byte-identical".into()
        } else {
            format!("outputs differ for {}", mismatches.join("; "))
        },
    }
}

fn verify_artifact(
    w: &GcqChannel,
    p: &InputDistribution,
    config: &RunConfig,
) -> Result<Artifact, CliError> {
    let mut report = verify::run_all(w, p, config.seed)?;
    report.push(determinism_check(config));
    let mut t = Table::new(&[
        ("module", false),
        ("property", false),
        ("passed", false),
        ("worst", false),
        ("tolerance", false),
        ("detail", false),
    ]);
    let mut console = String::new();
    for c in &report.checks {
        console.push_str(&format!(
            "[{}] {}::{} worst={} tol={} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            format_number(c.worst),
            format_number(c.tolerance),
            c.detail
        ));
        t.rows.push(vec![
            Cell::Text(c.module.clone()),
            Cell::Text(c.name.clone()),
            Cell::Bool(c.passed),
            Cell::Num(c.worst),
            Cell::Num(c.tolerance),
            Cell::Text(c.detail.clone()),
        ]);
    }
    let total = report.checks.len();
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    console.push_str(&format!(
        "verify: {}/{total} properties passed (seed {})\n",
        total - failed,
        config.seed
    ));
    t.meta.push(("seed".into(), json!(config.seed)));
    Ok(Artifact {
        text: t.render(config.format, Units::Nats),
        console: Some(console),
        deferred: (failed > 0).then_some(CliError::VerifyFailed { failed, total }),
    })
}

/// Runs `config`, writes its artifact and returns the process exit code.
pub fn run(config: &RunConfig) -> u8 {
    let artifact = match render(config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(console) = &artifact.console {
        print!("{console}");
    }
    match &config.output_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &artifact.text) {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_FAILURE;
            }
        }
        None if artifact.console.is_none() => print!("{}", artifact.text),
        None => {}
    }
    match artifact.deferred {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None => EXIT_OK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5e-9), "-2.5e-9");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_number(9.999999999999996), "10");
        assert_eq!(format_number(f64::INFINITY), "inf");
        for v in [std::f64::consts::PI, 1e-7 / 3.0, 2.0 / 3.0 * 1e20, -0.1] {
            let back = parse_number(&format_number(v)).unwrap();
            assert!(((back - v) / v).abs() <= 5e-12, "{v} -> {back}");
        }
    }

    #[test]
    fn z_values() {
        assert_eq!(parse_z("inf"), Ok(ZParam::Infinite));
        assert_eq!(parse_z("1.5"), Ok(ZParam::Finite(1.5)));
        assert!(parse_z("x").is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(Cell::Text("a,b".into()).csv(1.0), "\"a,b\"");
        assert_eq!(
            Cell::Text("say \"hi\"".into()).csv(1.0),
            "\"say \"\"hi\"\"\""
        );
    }

    #[test]
    fn error_codes() {
        assert_eq!(
            CliError::from(Error::Schema("x".into())).exit_code(),
            EXIT_SCHEMA
        );
        assert_eq!(
            CliError::from(Error::ResourceLimit("x".into())).exit_code(),
            EXIT_RESOURCE
        );
        let e = Error::NonConvergence {
            alpha: 2.0,
            z: "1".into(),
            detail: String::new(),
        };
        assert_eq!(CliError::from(e).exit_code(), EXIT_NON_CONVERGENCE);
    }
}
