//! `rnda`: densities, λ_max CDFs, samplers and verification suites for
//! Wishart matrices over ℝ, ℂ, ℍ and 𝕆.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rnda_core::ConvergenceReport;
use serde_json::json;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Convergence(String, Box<ConvergenceReport>),
    #[error("{0}")]
    Io(String),
    #[error("{0} verification check(s) failed")]
    VerifyFailed(usize, Box<serde_json::Value>),
}

impl From<rnda_core::Error> for CliError {
    fn from(e: rnda_core::Error) -> Self {
        match e {
            rnda_core::Error::Convergence(report) => CliError::Convergence(
                format!("series did not converge within degree {} (try a larger --max-degree)", report.max_degree),
                report,
            ),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(..) => 1,
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Convergence(..) => 3,
        }
    }
}

pub fn report_json(r: &ConvergenceReport) -> serde_json::Value {
    json!({
        "converged": r.converged,
        "degree": r.degree,
        "max_degree": r.max_degree,
        "rel_tol": r.rel_tol,
        "layer_magnitudes": r.layer_magnitudes,
    })
}

#[derive(Parser, Debug)]
#[command(name = "rnda", version, about = "Wishart distributions over the real normed division algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Log density of a Wishart, generalised Wishart or inverse generalised Wishart matrix
    Density(DensityArgs),
    /// CDF of the largest eigenvalue, by series or Monte Carlo
    Lmax(LmaxArgs),
    /// Sample eigenvalues of X*Θ⁻¹X to CSV
    Sample(SampleArgs),
    /// Run the verification suites
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Algebra dimension: 1, 2, 4 or 8
    #[arg(long)]
    pub beta: u32,
    /// Degrees of freedom
    #[arg(long)]
    pub n: f64,
    /// Scale matrix Σ
    #[arg(long)]
    pub sigma: PathBuf,
    /// Noncentrality factor M = μ*Θ⁻¹μ, so that Ω = Σ⁻¹M (absent = central)
    #[arg(long)]
    pub omega: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub max_degree: usize,
    /// Relative tolerance for dropping a degree layer
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    Wishart,
    Gw,
    InvGw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Normal,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Evaluation point (W for inv-gw)
    #[arg(long)]
    pub s: PathBuf,
    #[arg(long, value_enum, default_value_t = Dist::Wishart)]
    pub dist: Dist,
    #[arg(long, value_enum, default_value_t = Generator::Normal)]
    pub generator: Generator,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Mc,
}

#[derive(Args, Debug)]
pub struct LmaxArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated evaluation points
    #[arg(long, conflicts_with = "y_range", required_unless_present = "y_range")]
    pub y_grid: Option<String>,
    /// lo:hi:steps, evenly spaced and inclusive
    #[arg(long)]
    pub y_range: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    pub method: Method,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Algebra dimension: 1, 2 or 4
    #[arg(long)]
    pub beta: u32,
    /// Rows of X
    #[arg(long)]
    pub n: usize,
    /// Columns of X
    #[arg(long)]
    pub m: usize,
    /// Mean μ (n × m, default zero)
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Column covariance Σ (default identity)
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Row covariance Θ (default identity)
    #[arg(long)]
    pub theta: Option<PathBuf>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Reductions,
    McCentral,
    McNoncentral,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Fast,
    Full,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    JackNormalization,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, value_enum, default_value_t = Budget::Fast)]
    pub budget: Budget,
    /// Deliberately corrupt a computation to check that the suites notice
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RNDA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Validation(format!("RNDA_THREADS must be a positive integer (got {raw:?})")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Density(args) => commands::density(&args),
        Command::Lmax(args) => commands::lmax(&args),
        Command::Sample(args) => commands::sample(&args),
        Command::Verify(args) => verify::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let out = match &e {
                CliError::Convergence(msg, report) => Some(json!({
                    "schema_version": SCHEMA_VERSION,
                    "error": msg,
                    "report": report_json(report),
                })),
                CliError::VerifyFailed(_, report) => Some((**report).clone()),
                _ => None,
            };
            if let Some(out) = out {
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
