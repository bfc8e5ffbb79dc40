//! Command-line front end: environment generation, cluster and closure
//! computation, phase classification, coupling and duality checks, slope and
//! percolation statistics, band simulation, exact bounds, and SVG rendering.
//!
//! Every subcommand's output bytes are a function of its flags (seeds
//! included); long-running commands take `--replicas` and `--jobs` and
//! reduce deterministically regardless of the job count.

mod commands;
mod render;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "orthant", version, about = "Degenerate random environments on Z^2 and their dual oriented site percolation")]
struct Cli {
    /// Worker threads for replica-parallel commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Realize an environment window and write a snapshot.
    EnvGen(commands::EnvGenArgs),
    /// Compute a forward/backward/bi-connected cluster from a snapshot.
    Cluster(commands::ClusterArgs),
    /// Fill finite holes of the forward cluster and extract its boundary.
    Closure(commands::ClosureArgs),
    /// Classify closures as blocked below/above or full-plane over replicas.
    Classify(commands::ClassifyArgs),
    /// Check closure monotonicity under the shared coupling.
    CoupleCheck(commands::CoupleCheckArgs),
    /// Deterministic walk slopes: empirical vs closed form.
    Slope(commands::SlopeArgs),
    /// Triangular-lattice cluster statistics and boundary slope estimates.
    OtspStats(commands::OtspStatsArgs),
    /// Cross-check the closure boundary against the triangular formula.
    DualityCheck(commands::DualityCheckArgs),
    /// Critical-probability lower bounds: exact roots or stochastic bisection.
    Bound(commands::BoundArgs),
    /// Sample band-renewal traces.
    BandSim(commands::BandSimArgs),
    /// Render cluster layers to SVG.
    Render(commands::RenderArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version print and exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::EnvGen(args) => commands::env_gen(args),
        Command::Cluster(args) => commands::cluster(args),
        Command::Closure(args) => commands::closure(args),
        Command::Classify(args) => commands::classify(args),
        Command::CoupleCheck(args) => commands::couple_check(args),
        Command::Slope(args) => commands::slope(args),
        Command::OtspStats(args) => commands::otsp_stats(args),
        Command::DualityCheck(args) => commands::duality_check(args),
        Command::Bound(args) => commands::bound(args),
        Command::BandSim(args) => commands::band_sim(args),
        Command::Render(args) => commands::render(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CommandError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::CommandError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
