mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use curvlab::graph::LaplacianMode;
use curvlab::modified_heat::SolveMethod;

pub use commands::Coded;

#[derive(Parser)]
#[command(name = "curvlab", version, about = "Curvature-dimension checks, heat flows and inequality audits on weighted graphs")]
pub struct Cli {
    /// Record wall-clock time in the manifest (reports are then no longer byte-identical).
    #[arg(long, global = true)]
    pub record_time: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse a graph file and report its bounded-geometry constants.
    Validate { graph: PathBuf },
    /// Write a graph file for a built-in family.
    Gen(GenArgs),
    /// Check CD(K, n), or compute the optimal-K profile, with a brute-force cross-check.
    Curvature(CurvatureArgs),
    /// Apply the heat semigroup, optionally auditing the gradient estimates.
    Heat(HeatArgs),
    /// Solve du/dt = Delta u + Gamma u and run the requested verifiers.
    ModifiedHeat(ModifiedHeatArgs),
    /// Volume growth and doubling constants.
    Doubling(DoublingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CayleyKind {
    Zd,
    Torus,
    Cyclic,
    Sym,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    TwoVertex,
    Path,
    Cycle,
    Complete,
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Kernel,
    Conductance,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Reflecting,
    Absorbing,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["cayley", "conductance_random", "example_z_nonh2", "family"])))]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub cayley: Option<CayleyKind>,
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long = "mod")]
    pub modulus: Option<u32>,
    /// Symmetric group degree, or the size parameter of `--family`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, default_value = "markov")]
    pub mode: LaplacianMode,
    #[arg(long, value_enum, default_value = "reflecting")]
    pub boundary: BoundaryArg,
    #[arg(long)]
    pub conductance_random: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "example-z-nonh2")]
    pub example_z_nonh2: bool,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Defaults to `conductance` for random conductance graphs, `kernel` otherwise.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the graph here and print a JSON report instead of the graph.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("query").required(true).args(["k", "profile"])))]
pub struct CurvatureArgs {
    pub graph: PathBuf,
    /// Dimension parameter; `inf` is accepted.
    #[arg(long)]
    pub n: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub profile: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub oracle_trials: usize,
    /// Vertex label; repeat for several (default: all).
    #[arg(long = "vertex")]
    pub vertices: Option<Vec<String>>,
}

#[derive(Args)]
pub struct HeatArgs {
    pub graph: PathBuf,
    /// Comma-separated times.
    #[arg(long = "t", value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Vertex function file.
    #[arg(long = "f")]
    pub function: Option<PathBuf>,
    /// `K,n` for the gradient-estimate audit.
    #[arg(long, allow_hyphen_values = true)]
    pub audit: Option<String>,
    /// Number of random functions added to the audit corpus (default 16 without `--f`).
    #[arg(long)]
    pub corpus: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV of `P_t f` with columns `t,vertex,value`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct ModifiedHeatArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub u0: PathBuf,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long, default_value = "picard")]
    pub method: SolveMethod,
    /// Restart at half the local existence time until the horizon is covered.
    #[arg(long)]
    pub global: bool,
    /// Any of decay, oscillation, liyau, harnack, comparison.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub verify: Vec<Verifier>,
    /// Harnack pairs `<x> <y> <t1> <t2>` (default: every ordered pair at mid-horizon and horizon).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Comparison exponents (default: omega and e^2).
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    /// CSV trace with columns `t,vertex,u,gamma,laplacian`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verifier {
    Decay,
    Oscillation,
    Liyau,
    Harnack,
    Comparison,
}

#[derive(Args)]
pub struct DoublingArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub r_max: usize,
    /// Center label; repeat for several (default: all vertices).
    #[arg(long = "center")]
    pub centers: Option<Vec<String>>,
    /// Also check CD(0, n).
    #[arg(long)]
    pub cd0_n: Option<f64>,
    /// CSV with columns `center,r,V,ratio,local_bound`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn threads() -> anyhow::Result<Option<usize>> {
    let Ok(v) = std::env::var("CURVLAB_THREADS") else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("CURVLAB_THREADS must be a positive integer, got `{v}`"))?;
    anyhow::ensure!(n > 0, "CURVLAB_THREADS must be positive");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(Some(n))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    let result = threads().and_then(|t| commands::run(cli, argv, t));
    match result {
        Ok(out) => {
            if let Some(text) = out.stdout {
                print!("{text}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            let code = e.downcast_ref::<Coded>().map_or(1, |c| c.code);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
