use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

/// Estimate negative mixtures of spherical Gaussians and split signed rational
/// series into probabilistic automata.
#[derive(Debug, Parser)]
#[command(name = "negmix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw samples from a model JSON by rejection sampling.
    Sample(SampleArgs),
    /// Fit a spherical mixture to a CSV dataset.
    Fit(FitArgs),
    /// Recover (weight, mean) pairs from moment tensors M2 and M3.
    Decompose(DecomposeArgs),
    /// Operations on weighted automata.
    #[command(subcommand)]
    Wfa(WfaCommand),
    /// Reproduce the running-example experiments as CSV.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Number of components.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Power-iteration convergence tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Eigenvalues of M2 below this modulus count as zero.
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Relative imaginary residue above which a result is flagged complex.
    #[arg(long, default_value_t = 1e-6)]
    imag_tol: f64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// The data file starts with a header row.
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Rank candidates by likelihood alone, even when their variances are negative.
    #[arg(long)]
    allow_negative_variance: bool,
    /// Output model JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-candidate trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long)]
    m2: PathBuf,
    #[arg(long)]
    m3: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum WfaCommand {
    /// Write the nonnegative pair (r⁺, r⁻) with r = r⁺ − r⁻.
    Split {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rescale a nonnegative representation into a probabilistic automaton.
    Normalize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write r = s⁺p⁺ − s⁻p⁻ with probabilistic automata p⁺ and p⁻.
    Mixture {
        #[arg(long)]
        model: PathBuf,
        /// Skip the check that the series sums to 1.
        #[arg(long)]
        no_distribution_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the series on a word.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Symbols separated by spaces or commas, or one character per symbol.
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Sum the series over all words.
    Sum {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Parameter error against iteration count on exact moment tensors.
    Convergence {
        /// Number of random initializations.
        #[arg(long, default_value_t = 500)]
        runs: usize,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter error against dataset size.
    Learning {
        /// Comma-separated dataset sizes.
        #[arg(long, value_delimiter = ',', default_values_t = negmix::experiments::DEFAULT_SIZES)]
        sizes: Vec<usize>,
        /// Datasets per size.
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-dataset CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => commands::sample(&a.model, a.n, a.seed, a.out.as_deref()),
        Command::Fit(a) => commands::fit(&a),
        Command::Decompose(a) => commands::decompose(&a),
        Command::Wfa(c) => commands::wfa(c),
        Command::Experiment(c) => commands::experiment(c),
    };
    match result {
        Ok(()) | Err(CliError::PipeClosed) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Numerical(_) => ExitCode::from(1),
                CliError::Usage(_) | CliError::PipeClosed => ExitCode::from(2),
            }
        }
    }
}
