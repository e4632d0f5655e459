//! Experiment driver: node generation, coarsening, operator assembly, and
//! solver studies with machine-readable CSV/JSON output.

mod experiments;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mgm::discretize::{DiscretizationConfig, Method, ProblemKind};
use mgm::geom::SurfaceSpec;
use mgm::io;
use mgm::la::SweepDirection;
use mgm::multilevel::MgmConfig;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "mgm",
    version,
    about = "Meshfree multilevel solver for surface Poisson problems on point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate surface nodes and write them as xyz (points + normals).
    Nodes(NodesArgs),
    /// Thin a point cloud to an exact target size.
    Coarsen(CoarsenArgs),
    /// Assemble the discrete surface Laplacian and write it as Matrix Market.
    Assemble(AssembleArgs),
    /// Solve one problem and report convergence.
    Solve(SolveArgs),
    /// Run a grid of solver configurations and emit one CSV row per run.
    Table(TableArgs),
    /// Iteration-capped accuracy study against the exact harmonic solution.
    Accuracy(AccuracyArgs),
    /// Emit the per-iteration residual curve of a single run.
    Curves(CurvesArgs),
}

/// Surfaces: `sphere:k=5`, `cyclide:n=8192,seed=7`, or `file:path` where the
/// path extension picks the format (.xyz, .obj, .ply).
#[derive(Clone, Debug)]
struct Surface(SurfaceSpec);

impl FromStr for Surface {
    type Err = mgm::Error;
    fn from_str(s: &str) -> mgm::Result<Self> {
        SurfaceSpec::parse(s).map(Surface)
    }
}

#[derive(Args)]
struct NodesArgs {
    #[arg(long)]
    surface: Surface,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CoarsenArgs {
    /// Input point cloud (.xyz, .obj, or .ply).
    #[arg(long = "in")]
    input: PathBuf,
    /// Target number of points.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct DiscretizationArgs {
    /// rbf-fd or gfd
    #[arg(long, default_value = "rbf-fd")]
    method: Method,
    /// Polynomial degree.
    #[arg(long)]
    ell: usize,
    /// PHS order for rbf-fd (default: ell).
    #[arg(long)]
    phs_order: Option<usize>,
    /// Gaussian weight parameter for gfd.
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Stencil size (default: (ell+1)(ell+2)).
    #[arg(long)]
    stencil_size: Option<usize>,
}

impl DiscretizationArgs {
    fn build(&self, method: Method, ell: usize) -> Result<DiscretizationConfig> {
        let mut config = DiscretizationConfig::new(method, ell)?;
        if let Some(k) = self.phs_order {
            config = config.with_phs_order(k)?;
        }
        config = config.with_alpha(self.alpha)?;
        if let Some(n) = self.stencil_size {
            config = config.with_stencil_size(n)?;
        }
        Ok(config)
    }
}

#[derive(Args, Clone)]
struct MgmArgs {
    /// Minimum number of nodes on the coarsest level.
    #[arg(long, default_value_t = 250)]
    n_min: usize,
    /// Pre-smoothing sweeps.
    #[arg(long, default_value_t = 1)]
    nu1: usize,
    /// Post-smoothing sweeps.
    #[arg(long, default_value_t = 1)]
    nu2: usize,
    /// forward or backward
    #[arg(long, default_value = "forward")]
    pre_smoother: String,
    /// forward or backward
    #[arg(long, default_value = "forward")]
    post_smoother: String,
    /// Interpolation stencil size.
    #[arg(long, default_value_t = 3)]
    transfer_stencil: usize,
}

fn sweep_direction(s: &str) -> Result<SweepDirection> {
    match s {
        "forward" => Ok(SweepDirection::Forward),
        "backward" => Ok(SweepDirection::Backward),
        other => bail!("unknown smoother direction '{other}' (expected forward or backward)"),
    }
}

impl MgmArgs {
    fn build(&self) -> Result<MgmConfig> {
        let config = MgmConfig {
            n_min: self.n_min,
            nu1: self.nu1,
            nu2: self.nu2,
            pre_smoother: sweep_direction(&self.pre_smoother)?,
            post_smoother: sweep_direction(&self.post_smoother)?,
            transfer_stencil: self.transfer_stencil,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct AssembleArgs {
    #[arg(long)]
    surface: Surface,
    #[command(flatten)]
    disc: DiscretizationArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    surface: Surface,
    #[command(flatten)]
    disc: DiscretizationArgs,
    #[command(flatten)]
    mgm: MgmArgs,
    /// poisson or shifted
    #[arg(long, default_value = "shifted")]
    problem: ProblemKind,
    /// Shift in I - mu * Laplacian (shifted problem only).
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// mgm, mgm-gmres, mgm-bicgstab, gmres, or bicgstab
    #[arg(long, default_value = "mgm-gmres")]
    solver: experiments::SolverKind,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    maxit: usize,
    /// GMRES restart length (default: no restart).
    #[arg(long)]
    restart: Option<usize>,
    /// Seed for the random right-hand side.
    #[arg(long)]
    seed: u64,
    /// Read the right-hand side from a text vector instead of the seeded
    /// generator.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Write the solution as a text vector.
    #[arg(long)]
    out_solution: Option<PathBuf>,
    /// Write the residual history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Write the hierarchy summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Repeatable surface specification.
    #[arg(long, required = true)]
    surface: Vec<Surface>,
    /// Repeatable method.
    #[arg(long, required = true)]
    method: Vec<Method>,
    /// Repeatable polynomial degree.
    #[arg(long, required = true)]
    ell: Vec<usize>,
    /// Repeatable solver.
    #[arg(long, required = true)]
    solver: Vec<experiments::SolverKind>,
    #[arg(long, default_value = "shifted")]
    problem: ProblemKind,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    maxit: usize,
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    mgm: MgmArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AccuracyArgs {
    /// Sphere sizes (must be icosahedral counts 10*4^k + 2).
    #[arg(long, required = true, value_delimiter = ',')]
    n: Vec<usize>,
    /// Polynomial degrees.
    #[arg(long, required = true, value_delimiter = ',')]
    ell: Vec<usize>,
    /// Iteration caps.
    #[arg(long, required = true, value_delimiter = ',')]
    caps: Vec<usize>,
    /// Repeatable method (default: rbf-fd).
    #[arg(long, default_value = "rbf-fd")]
    method: Vec<Method>,
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    #[command(flatten)]
    mgm: MgmArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path too
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// MGM_THREADS caps the internal (assembly) parallelism.
fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MGM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("MGM_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to configure the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Nodes(args) => {
            let cloud = args.surface.0.build()?;
            let mut file = std::fs::File::create(&args.out)
                .with_context(|| format!("cannot create {}", args.out.display()))?;
            io::write_xyz(&cloud, &mut file)?;
            println!("wrote {} nodes to {}", cloud.len(), args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Coarsen(args) => {
            let format = io::CloudFormat::from_path(&args.input)?;
            let cloud = io::load_cloud(&args.input, format)?;
            let keep = mgm::coarsen::wse_coarsen(&cloud, args.n)?;
            let coarse = cloud.subset(&keep);
            let mut file = std::fs::File::create(&args.out)
                .with_context(|| format!("cannot create {}", args.out.display()))?;
            io::write_xyz(&coarse, &mut file)?;
            println!(
                "thinned {} -> {} nodes, wrote {}",
                cloud.len(),
                coarse.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Assemble(args) => {
            let cloud = args.surface.0.build()?;
            let config = args.disc.build(args.disc.method, args.disc.ell)?;
            let d = mgm::discretize::assemble_lbo(&cloud, &config)?;
            let mut file = std::fs::File::create(&args.out)
                .with_context(|| format!("cannot create {}", args.out.display()))?;
            io::write_matrix_market(&d, &mut file)?;
            println!(
                "assembled {}x{} operator ({} nonzeros) to {}",
                d.nrows(),
                d.ncols(),
                d.nnz(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => experiments::run_solve(&args),
        Command::Table(args) => experiments::run_table(&args),
        Command::Accuracy(args) => experiments::run_accuracy(&args),
        Command::Curves(args) => experiments::run_curves(&args),
    }
}
