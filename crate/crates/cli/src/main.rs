use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod svg;

use commands::CliError;

/// Seed used when neither `--seed` nor the config supplies one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "spillover", version, about = "Treatment effect estimation under unknown interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation grid from a config file and write the summary table.
    Simulate(SimulateArgs),
    /// Point estimates, variance estimates and intervals for one experiment.
    Analyze(AnalyzeArgs),
    /// Interference metrics of a graph.
    Metrics(MetricsArgs),
    /// Exact mixing coefficients of a design on a graph.
    Mixing(MixingArgs),
    /// Distance between two designs and the implied EATE gap bounds.
    Distance(DistanceArgs),
    /// Regenerate the data behind the simulation figures.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Summary output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Also write every replication to this path.
    #[arg(long)]
    pub dump_reps: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// `unit,z,y,p` table.
    #[arg(long)]
    pub data: PathBuf,
    /// Design description (JSON).
    #[arg(long)]
    pub design: PathBuf,
    /// Inflation: ber, avg, max or sr.
    #[arg(long, default_value = "ber")]
    pub variance_kind: String,
    /// `src,dst` edge list; needed for avg, max and sr.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Explicit inflation factor, used instead of the graph.
    #[arg(long)]
    pub factor: Option<f64>,
    /// Comma-separated factors for a sensitivity sweep.
    #[arg(long, value_delimiter = ',')]
    pub factors: Vec<f64>,
    /// Estimator for the interval rows: ht or hajek.
    #[arg(long, default_value = "ht")]
    pub estimator: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of units when it exceeds the largest label in the edge list.
    #[arg(long)]
    pub n: Option<usize>,
    /// Moments `p` of the interference counts to report.
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    pub moments: Vec<String>,
    /// Paired design file; adds e_avg and r_sum.
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MixingArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Edge list; identity when omitted.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value = "inf")]
    pub q: String,
    #[arg(long, default_value = "inf")]
    pub s: String,
    /// Largest number of units on the smaller side of a pair.
    #[arg(long, default_value_t = spillover::mixing::DEFAULT_ATOM_LIMIT)]
    pub limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub design_a: PathBuf,
    #[arg(long)]
    pub design_b: PathBuf,
    /// tv, w1, w2 or w<r> for another order.
    #[arg(long, default_value = "tv")]
    pub metric: String,
    /// Bound on the unit-level effects.
    #[arg(long, default_value_t = 1.0)]
    pub k_tau: f64,
    /// Edge list for the Wasserstein bound's moment term.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// figB1, figB2 or figB3.
    pub figure: String,
    /// small, medium or paper.
    #[arg(long, default_value = "small")]
    pub scale: String,
    /// Output directory.
    #[arg(long, default_value = "reproduce-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Required to start the paper-scale run.
    #[arg(long)]
    pub confirm: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Mixing(a) => commands::mixing(&a),
        Command::Distance(a) => commands::distance(&a),
        Command::Reproduce(a) => commands::reproduce(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.code())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) | CliError::Degenerate(m) => f.write_str(m),
        }
    }
}
