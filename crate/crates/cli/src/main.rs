use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod input;
mod output;

use output::Format;

/// Negative definiteness of powered geodesic distances: spectral tests,
/// stacked-circle witnesses and fractional index estimates.
#[derive(Debug, Parser)]
#[command(name = "fracindex", version, about)]
pub struct Cli {
    /// Worker threads (defaults to the hardware concurrency).
    #[arg(long, global = true, env = "FRACINDEX_THREADS")]
    pub threads: Option<usize>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geodesic distance between two points.
    Distance(DistanceArgs),
    /// Gram matrix of the kernel on a point list.
    Gram(KernelArgs),
    /// Negative-definiteness test of the kernel on a point list.
    NdTest(KernelArgs),
    /// Positive-definiteness test of the kernel on a point list.
    PdTest(KernelArgs),
    /// Covariance matrix of the fractional field pinned at an origin.
    FbmCov(FbmArgs),
    /// Circle, two-circle and stacked-circle quadratic forms.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// The alternating series S(H).
    Series(SeriesArgs),
    /// Exact expansion coefficients and their vanishing checks.
    Coeffs(CoeffsArgs),
    /// Upper/lower evidence for the fractional index of a space.
    EstimateIndex(EstimateArgs),
    /// Distance perturbation Δ(h) against the comparison cylinder.
    Perturbation(PerturbationArgs),
    /// Circle versus thin cylinders: GH distance against index evidence.
    GhDemo(GhArgs),
    /// Power-law fit of two CSV columns.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Space descriptor: inline JSON or a file path.
    #[arg(long)]
    pub space: String,
    /// First point as a JSON coordinate array.
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    /// Tolerance of the numeric geodesic solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub space: String,
    /// JSON array of coordinate arrays, inline or a file path.
    #[arg(long)]
    pub points: String,
    #[arg(long = "H")]
    pub h: f64,
    /// Apply exp(−λ·d^{2H}) instead of d^{2H}.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct FbmArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub origin: String,
    #[arg(long)]
    pub points: String,
    #[arg(long = "H")]
    pub h: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "H")]
    pub h: f64,
    /// One value, or a comma-separated list for a sweep.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// reordered (alias reduced), brute_force (alias brute) or asymptotic.
    #[arg(long, default_value = "reordered")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct StackArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Drop the β > 1 − 2H requirement.
    #[arg(long)]
    pub loose: bool,
}

#[derive(Debug, Subcommand)]
pub enum WitnessCmd {
    /// A_N: one alternating circle of perimeter 1.
    A(SweepArgs),
    /// B_N(z): cross term of two circles at height distance z.
    B {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Fixed height distance.
        #[arg(long, conflicts_with = "a", required_unless_present = "a")]
        z: Option<f64>,
        /// Height distance N^{−a}, following N.
        #[arg(long)]
        a: Option<f64>,
    },
    /// Q_N: ⌊N^β⌋ circles at spacing N^{−γ}.
    Q {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        stack: StackArgs,
    },
    /// Q′_N: the same layout measured with another space's distance.
    Qprime {
        #[arg(long)]
        space: String,
        #[arg(long = "H")]
        h: f64,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        stack: StackArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Smallest N with Q_N > 0 (doubling scan, then bisection).
    Crossover {
        #[arg(long = "H")]
        h: f64,
        #[command(flatten)]
        stack: StackArgs,
        #[arg(long = "max-N", default_value_t = 1 << 20)]
        max_n: usize,
        #[arg(long, default_value = "asymptotic")]
        method: String,
    },
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long = "H")]
    pub h: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value_t = 41)]
    pub order: usize,
    /// Order up to which Z is compared with the generating series
    /// (defaults to --order).
    #[arg(long)]
    pub check_order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub space: String,
    /// Comma-separated H values (default 0.05, 0.10, …, 1.0).
    #[arg(long = "H-grid", value_delimiter = ',')]
    pub h_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub no_bisect: bool,
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[arg(long, default_value_t = 32)]
    pub points: usize,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the stacked-circle witnesses on cylinder-like spaces.
    #[arg(long)]
    pub no_witnesses: bool,
    #[arg(long, default_value_t = 1 << 14)]
    pub max_witness_points: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct PerturbationArgs {
    #[arg(long)]
    pub space: String,
    /// Coarsest level (default: the height window).
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long, default_value_t = 11)]
    pub levels: usize,
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GhArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.2,0.1")]
    pub eps: Vec<f64>,
    #[arg(long = "H", default_value_t = 0.25)]
    pub h: f64,
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row (`-` for stdin).
    #[arg(long)]
    pub input: String,
    /// Column of abscissae (default: the first).
    #[arg(long)]
    pub x: Option<String>,
    /// Column of ordinates (default: the second).
    #[arg(long)]
    pub y: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = commands::run(&cli.command, cli.format)
        .and_then(|o| output::emit(o, cli.format, cli.out.as_ref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc =
                serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("error document")
            );
            ExitCode::from(1)
        }
    }
}
