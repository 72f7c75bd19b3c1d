use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vtd", version, about = "Variational time discretizations VTD(r,k) for M u' = F(t, u)")]
pub struct Cli {
    /// Arithmetic for the whole run.
    #[arg(long, value_enum, default_value_t = Precision::Double, global = true)]
    pub precision: Precision,
    /// Mantissa bits for `--precision extended`.
    #[arg(long, default_value_t = 256, global = true)]
    pub bits: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nodes, weights and exactness report of Q^{r,k}.
    Quadrature(QuadratureArgs),
    /// Solve one problem on a mesh and print the trajectory.
    Solve(SolveArgs),
    /// Errors and experimental orders over a sequence of uniform meshes.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub k: i64,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Built-in problem: ex1, ex2 or dahlquist:LAMBDA.
    #[arg(long, conflicts_with = "config")]
    pub problem: Option<String>,
    /// JSON file with a problem name or an affine-linear custom problem.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replaces the end of the time interval.
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[arg(long)]
    pub r: i64,
    #[arg(long)]
    pub k: i64,
    /// assoc, exact or qR,K.
    #[arg(long, default_value = "assoc")]
    pub integrator: String,
    /// Lift the solution by postprocessing: jump or residual.
    #[arg(long)]
    pub postprocess: Option<String>,
    /// Number of postprocessing steps (needs --postprocess).
    #[arg(long, requires = "postprocess")]
    pub pp_steps: Option<usize>,
    /// Depth of the interpolation cascade applied to f.
    #[arg(long)]
    pub cascade: Option<usize>,
    /// Newton iteration limit per interval.
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Absolute Newton tolerance (default: a multiple of the unit roundoff).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Vtd,
    Collocation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method_args: MethodArgs,
    #[arg(long, value_enum, default_value_t = SolveMethod::Vtd)]
    pub method: SolveMethod,
    /// Number of uniform intervals.
    #[arg(long, conflicts_with = "mesh")]
    pub steps: Option<usize>,
    /// Explicit mesh points, comma separated, starting at t0.
    #[arg(long, value_delimiter = ',')]
    pub mesh: Option<Vec<f64>>,
    /// Subintervals per mesh interval; each interval is sampled at m+1 points, both ends included.
    #[arg(long, default_value_t = 2)]
    pub samples: usize,
    /// Also print U'.
    #[arg(long)]
    pub derivative: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub method_args: MethodArgs,
    /// Numbers of intervals, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for independent resolutions.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
