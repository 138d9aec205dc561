use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use maxent_core::solver::{DEFAULT_DELTA1_TARGET, DEFAULT_EXPONENT_CAP, DEFAULT_MAX_ITERATIONS};
use maxent_core::{BasisKind, LogisticConfig, SolverConfig, StepStrategy, TestFunction};

#[derive(Debug, Parser)]
#[command(
    name = "maxent",
    version,
    about = "Maximum-entropy reconstruction of densities on [0,1] from their moments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the maximum-entropy density and write recon.csv and report.txt.
    Reconstruct(ReconstructArgs),
    /// Write the moments of a test function (or of the logistic map) to moments.csv.
    Moments(MomentsArgs),
    /// Reconstruct for a list of moment orders and write sweep.csv.
    Sweep(SweepArgs),
    /// Write logistic-map moments.csv and histogram.csv.
    LogisticGen(LogisticGenArgs),
    /// Recompute diagnostics from a saved recon.csv.
    Diagnose(DiagnoseArgs),
}

/// Where the moments come from: a corpus function, the logistic map or a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Function(TestFunction),
    Logistic,
    File,
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "logistic" => Ok(Source::Logistic),
            "file" => Ok(Source::File),
            other => other
                .parse::<TestFunction>()
                .map(Source::Function)
                .map_err(|_| {
                    format!(
                        "unknown function '{other}' (expected one of {}, logistic, file)",
                        TestFunction::IDS.join(", ")
                    )
                }),
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Function(t) => write!(f, "{t}"),
            Source::Logistic => f.write_str("logistic"),
            Source::File => f.write_str("file"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA1_TARGET)]
    pub delta1_target: f64,
    /// newton, gradient or hybrid.
    #[arg(long, default_value = "hybrid")]
    pub step_strategy: StepStrategy,
    #[arg(long, default_value_t = DEFAULT_EXPONENT_CAP)]
    pub exponent_cap: f64,
    /// Log solver progress every this many iterations (needs RUST_LOG=debug).
    #[arg(long, default_value_t = 0)]
    pub verbose_every: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            delta1_target: self.delta1_target,
            step_strategy: self.step_strategy,
            exponent_cap: self.exponent_cap,
            verbose_every: self.verbose_every,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LogisticArgs {
    #[arg(long, default_value_t = LogisticConfig::default().gamma)]
    pub gamma: f64,
    #[arg(long, default_value_t = LogisticConfig::default().ensemble_size)]
    pub ensemble: usize,
    #[arg(long, default_value_t = LogisticConfig::default().transient_steps)]
    pub transient: usize,
    #[arg(long, default_value_t = LogisticConfig::default().sample_steps)]
    pub samples: usize,
    #[arg(long, default_value_t = LogisticConfig::default().histogram_bins)]
    pub bins: usize,
    #[arg(long, default_value_t = LogisticConfig::default().rng_seed)]
    pub seed: u64,
}

impl LogisticArgs {
    pub fn config(&self) -> LogisticConfig {
        LogisticConfig {
            gamma: self.gamma,
            ensemble_size: self.ensemble,
            transient_steps: self.transient,
            sample_steps: self.samples,
            histogram_bins: self.bins,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// A corpus id, `logistic`, or `file` (with --moments-path).
    #[arg(long)]
    pub function: Source,
    /// Highest moment index M; defaults to all moments in --moments-path.
    #[arg(long)]
    pub moments: Option<usize>,
    /// Gauss-Legendre rule size.
    #[arg(long, default_value_t = 192)]
    pub nodes: usize,
    /// power or chebyshev.
    #[arg(long, default_value = "chebyshev")]
    pub basis: BasisKind,
    #[arg(long)]
    pub moments_path: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also estimate the gap with this threshold.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub logistic: LogisticArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    /// A corpus id or `logistic`.
    #[arg(long)]
    pub function: Source,
    #[arg(long)]
    pub moments: usize,
    /// Rule size for quadrature moments (--numeric); oscillatory uses 2048.
    #[arg(long, default_value_t = 192)]
    pub nodes: usize,
    #[arg(long, default_value = "chebyshev")]
    pub basis: BasisKind,
    /// Use quadrature instead of the closed form.
    #[arg(long)]
    pub numeric: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub logistic: LogisticArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// A corpus id or `logistic`.
    #[arg(long)]
    pub function: Source,
    /// Comma-separated moment orders.
    #[arg(long, value_delimiter = ',', required = true)]
    pub m_list: Vec<usize>,
    /// Comma-separated rule sizes.
    #[arg(long, value_delimiter = ',', default_value = "192")]
    pub nodes: Vec<usize>,
    #[arg(long, default_value = "chebyshev")]
    pub basis: BasisKind,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Gap threshold for the gap_width column.
    #[arg(long, default_value_t = maxent_core::diagnostics::DEFAULT_GAP_EPSILON)]
    pub epsilon: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub logistic: LogisticArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LogisticGenArgs {
    #[arg(long, default_value_t = 80)]
    pub moments: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub logistic: LogisticArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub recon_path: PathBuf,
    /// The corpus id the reconstruction targets, or `logistic`.
    #[arg(long)]
    pub function: Source,
    /// Exact moments; defaults to those of --function.
    #[arg(long)]
    pub moments_path: Option<PathBuf>,
    /// Moment order used for delta1; defaults to all of --moments-path.
    #[arg(long)]
    pub moments: Option<usize>,
    /// Histogram oracle for `logistic`.
    #[arg(long)]
    pub histogram_path: Option<PathBuf>,
    #[arg(long, default_value = "chebyshev")]
    pub basis: BasisKind,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}
