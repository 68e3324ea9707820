//! `calabi-pack`: compute hyperbolic circle packing geometry on closed
//! triangulated surfaces and drive the packing to prescribed combinatorial
//! curvature, by curvature flow or Newton iteration.

use std::path::PathBuf;

use calabi_core::flow::{FlowError, NewtonError};
use calabi_core::hypgeom::GeometryError;
use calabi_core::laplacian::LinalgError;
use calabi_core::mesh::{MeshError, WeightError};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod io;
pub mod output;

use io::RadiiSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("weights: {0}")]
    Weight(#[from] WeightError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("flow: {0}")]
    Flow(FlowError),
    #[error("solve: {0}")]
    Newton(NewtonError),
    #[error("linear algebra: {0}")]
    Linalg(#[from] LinalgError),
    #[error("{0}")]
    Usage(String),
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        CliError::Flow(e)
    }
}

impl From<NewtonError> for CliError {
    fn from(e: NewtonError) -> Self {
        CliError::Newton(e)
    }
}

impl CliError {
    /// Documented exit codes: 0 success, 2 usage (from clap), 3 file/parse,
    /// 4 mesh validation, 5 geometry/domain, 6 solver non-convergence,
    /// 7 quadrature failure, 8 internal linear algebra.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::File { .. } | CliError::Parse { .. } | CliError::Io(_) | CliError::Json(_) => 3,
            CliError::Mesh(_) => 4,
            CliError::Weight(_) | CliError::Geometry(_) => 5,
            CliError::Flow(FlowError::QuadratureFailure { .. }) => 7,
            CliError::Flow(FlowError::Linalg(_)) => 8,
            CliError::Flow(_) => 5,
            CliError::Newton(NewtonError::NoConvergence { .. })
            | CliError::Newton(NewtonError::BlowupGuard { .. }) => 6,
            CliError::Newton(NewtonError::Geometry(_)) => 5,
            CliError::Newton(NewtonError::Linalg(_)) => 8,
            CliError::Linalg(_) => 8,
            CliError::Usage(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "calabi-pack",
    version,
    about = "Hyperbolic circle packing curvature flows on closed triangulated surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a mesh and run the combinatorial obstruction check
    Check(CheckArgs),
    /// Edge lengths, angles, curvatures and the Gauss-Bonnet residual
    Curvature(CurvatureArgs),
    /// Integrate the curvature flow and export the trajectory
    Flow(FlowArgs),
    /// Newton-solve for a packing with prescribed curvature
    Solve(SolveArgs),
    /// Evaluate the curvature potential or probe its growth along rays
    Potential(PotentialArgs),
    /// Time flow vs Newton over seeded random starts
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Mesh file: `N F` header line, then F lines of three 0-based indices
    #[arg(long)]
    pub mesh: PathBuf,
    /// Edge weight file (`i j phi` per line, radians); all zero when absent
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Emit a single JSON document on stdout
    #[arg(long)]
    pub json: bool,
    /// Suppress non-essential output
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial radii: const:<x> | rand:<seed> | file:<path>
    #[arg(long, default_value = "const:1")]
    pub radii: RadiiSpec,
    /// Write the assembled Laplacian in `row col value` coordinate format
    #[arg(long)]
    pub dump_laplacian: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial radii: const:<x> | rand:<seed> | file:<path>
    #[arg(long, default_value = "const:1")]
    pub radii: RadiiSpec,
    /// Stop once max |K - target| drops below this
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Initial step size
    #[arg(long, default_value_t = 1e-2)]
    pub h0: f64,
    /// Step size cap
    #[arg(long, default_value_t = 10.0)]
    pub hmax: f64,
    /// Local error tolerance of the embedded pair
    #[arg(long, default_value_t = 1e-10)]
    pub step_tol: f64,
    /// Integration horizon
    #[arg(long, default_value_t = 1e4)]
    pub tmax: f64,
    /// Accepted-step budget
    #[arg(long, default_value_t = 200_000)]
    pub max_steps: usize,
    /// Prescribed curvature target file (one value per vertex); zero when absent
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Record the smallest Laplacian eigenvalue at every sample
    #[arg(long)]
    pub record_lambda1: bool,
    /// Output directory for trajectory.csv / trajectory.json
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial radii: const:<x> | rand:<seed> | file:<path>
    #[arg(long, default_value = "const:1")]
    pub radii: RadiiSpec,
    /// Residual tolerance on max |K - target|
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration budget
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Prescribed curvature target file; zero when absent
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Write the solution packing as JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PotentialArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Base point radii (the potential minimizer)
    #[arg(long, default_value = "const:1")]
    pub base: RadiiSpec,
    /// Evaluation point radii (required unless probing)
    #[arg(long)]
    pub radii: Option<RadiiSpec>,
    /// Probe growth along this many random rays instead of evaluating
    #[arg(long)]
    pub probe_rays: Option<usize>,
    /// Ray length for the probe
    #[arg(long, default_value_t = 5.0)]
    pub probe_radius: f64,
    /// Seed for probe ray directions
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of seeded random starts
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    /// Base seed; run i uses seed + i
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance for both solvers
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Flow integration horizon
    #[arg(long, default_value_t = 1e4)]
    pub tmax: f64,
}

/// Runs a parsed command line. The caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Check(args) => commands::check(args),
        Command::Curvature(args) => commands::curvature(args),
        Command::Flow(args) => commands::flow(args),
        Command::Solve(args) => commands::solve(args),
        Command::Potential(args) => commands::potential(args),
        Command::Bench(args) => commands::bench(args),
    }
}
