//! Command-line surface for the Fisher-Rao / alpha-connection library:
//! divergences between densities, geodesic solves (PDE and closed form),
//! the Fisher-Rao matrix of parametric families, and the validation
//! suites. Bulk fields go to CSV, scalars and metadata to JSON sidecars.

mod commands;
mod output;
mod spec;
mod suites;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Failure modes mapped onto the exit-code discipline: configuration
/// problems exit 2, everything else unexpected exits 1. Breakdown of a
/// geodesic is data, not a failure, and still exits 0.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Internal(String),
}

impl From<frf_core::Error> for Failure {
    fn from(e: frf_core::Error) -> Self {
        match e {
            frf_core::Error::InvalidParameter(_)
            | frf_core::Error::InvalidDensity(_)
            | frf_core::Error::InvalidGrid(_) => Failure::Config(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

pub type CliResult = std::result::Result<(), Failure>;

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("alpha must be a number in [-1, 1], got `{s}`"))?;
    if !(v.is_finite() && v.abs() <= 1.0) {
        return Err(format!("alpha must lie in the range [-1, 1], got {s}"));
    }
    Ok(v)
}

#[derive(Parser)]
#[command(
    name = "frf",
    version,
    about = "Alpha-divergences, the Fisher-Rao metric, and generalized \
             Proudman-Johnson geodesics on the circle and flat torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alpha-divergences and the Hellinger distance between two densities.
    Divergence(DivergenceArgs),
    /// Integrate a geodesic (PDE) or evaluate a closed-form solution.
    Geodesic(GeodesicArgs),
    /// Run a named validation suite and report residuals as JSON.
    Validate(ValidateArgs),
    /// Fisher-Rao matrix of a parametric density family.
    FisherRao(FisherRaoArgs),
}

#[derive(Args)]
struct DivergenceArgs {
    /// Grid size (even, >= 16).
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Alpha values; repeat the flag for several.
    #[arg(long = "alpha", value_parser = parse_alpha, allow_negative_numbers = true,
          default_values_t = [-1.0, 0.0, 1.0])]
    alphas: Vec<f64>,
    /// First density: `uniform` or `trig:a1,b1;a2,b2;...` meaning
    /// 1 + sum_k a_k sin(2 pi k x) + b_k cos(2 pi k x).
    #[arg(long)]
    from: String,
    /// Second density, same grammar.
    #[arg(long)]
    to: String,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pde,
    ClosedForm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GeodesicArgs {
    /// Grid size per axis (even; power of two >= 16 when --dim > 1).
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Spatial dimension (1 = circle, 2 or 3 = flat torus).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_parser = parse_alpha, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long = "t-final")]
    t_final: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long, value_enum, default_value = "pde")]
    method: Method,
    /// Initial velocity. Dim 1: `zero`, `sine` (sin(2 pi x)/pi), or
    /// `trig:a1,b1;...` (anchored to vanish at 0). Dim >= 2: `zero`,
    /// `grad-sine`, `swirl`, `grad-sine+swirl`.
    #[arg(long, default_value = "sine")]
    init: String,
    /// Chart data `a` for --method closed-form at alpha = 1.
    /// Dim 1: `trig:...`; dim >= 2: `zero` or `nd-sine-cos`.
    #[arg(long = "chart-a", default_value = "trig:0.3,0")]
    chart_a: String,
    /// Chart data `b`, same grammar as --chart-a.
    #[arg(long = "chart-b", default_value = "trig:0,0.2")]
    chart_b: String,
    /// Keep every k-th stored time step in the trajectory file.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Trajectory file path; a JSON sidecar lands at `<out>.json`
    /// (csv format) or everything goes into one JSON file (json format).
    #[arg(long)]
    out: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Calculus,
    Group,
    Divergence,
    Duality,
    #[value(name = "geodesic-1d")]
    #[serde(rename = "geodesic-1d")]
    Geodesic1d,
    #[value(name = "torus-nd")]
    #[serde(rename = "torus-nd")]
    TorusNd,
    All,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Grid size used by the circle suites.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Optional JSON report path (the report also goes to stdout).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct FisherRaoArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Family preset: `cosine` (1 parameter, 1 + t1 cos 2 pi x) or
    /// `cos-sin` (2 parameters, 1 + t1 cos 2 pi x + t2 sin 2 pi x).
    #[arg(long, default_value = "cosine")]
    family: String,
    /// Evaluation point; repeat once per parameter (defaults to zeros).
    #[arg(long = "theta", allow_negative_numbers = true)]
    thetas: Vec<f64>,
    /// Finite-difference step of the score estimate.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long)]
    out: Option<String>,
}

/// Worker-thread cap from FRF_NUM_THREADS (default 1).
fn thread_cap() -> std::result::Result<usize, Failure> {
    match std::env::var("FRF_NUM_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => s
            .parse::<usize>()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| {
                Failure::Config(format!(
                    "FRF_NUM_THREADS must be a positive integer, got `{s}`"
                ))
            }),
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Divergence(args) => commands::cmd_divergence(&args),
        Command::Geodesic(args) => commands::cmd_geodesic(&args),
        Command::Validate(args) => commands::cmd_validate(&args),
        Command::FisherRao(args) => commands::cmd_fisher_rao(&args),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            1
        }
    }
}
