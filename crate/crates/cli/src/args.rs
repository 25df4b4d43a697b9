use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gll", version, about = "Likelihood-based evidence for composite hypotheses")]
pub struct Cli {
    /// TOML optimizer settings; falls back to $GLL_CONFIG.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized likelihood ratio of H1 over H2.
    Glr(GlrArgs),
    /// Normalized profile likelihood of the interest parameter on a grid, as CSV.
    Profile(ProfileArgs),
    /// The 1/k support set of the interest parameter.
    Support(SupportArgs),
    /// Monte Carlo distribution of 2 log GLR for binomial experiments.
    Simulate(SimulateArgs),
    /// Evidence from a test decision or a p-value.
    Reduced {
        #[command(subcommand)]
        command: ReducedCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Binomial,
    TwoBinomial,
    BivnormMeanDiff,
    BivnormSdRatio,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Successes (binomial).
    #[arg(long)]
    pub x: Option<u64>,
    /// Trials (binomial).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub x1: Option<u64>,
    #[arg(long)]
    pub n1: Option<u64>,
    #[arg(long)]
    pub x2: Option<u64>,
    #[arg(long)]
    pub n2: Option<u64>,
    /// Paired observations, CSV with header `y_t,y_r` (bivariate normal models).
    #[arg(long, value_name = "CSV")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GlrArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Predicate defining H1, e.g. "theta > 0.2".
    #[arg(long)]
    pub h1: String,
    /// Predicate defining H2.
    #[arg(long, required_unless_present = "complement", conflicts_with = "complement")]
    pub h2: Option<String>,
    /// Use the complement of H1 as H2.
    #[arg(long)]
    pub complement: bool,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Name of the interest parameter; must match the model's.
    #[arg(long)]
    pub interest: Option<String>,
    /// Grid as lo:hi:steps.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Write the CSV here and print a JSON summary instead.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SupportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Support level, greater than 1.
    #[arg(long)]
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// True value 0.2 on the common boundary of theta <= 0.2 and theta > 0.2.
    Boundary,
    /// Medians of log GLR across growing sample sizes.
    Consistency,
    /// theta == theta0 against its complement.
    PointNull,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    /// Sample size (boundary, point-null).
    #[arg(long, default_value_t = 2500)]
    pub n: u64,
    /// Comma-separated sample sizes (consistency).
    #[arg(long, value_delimiter = ',', default_values_t = [50u64, 200, 800])]
    pub sizes: Vec<u64>,
    /// Replications per sample size; 20000 by default, 2000 for consistency.
    #[arg(long)]
    pub replications: Option<usize>,
    /// True success probability; 0.3001 for point-null, 0.1 for consistency.
    #[arg(long)]
    pub theta0: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the raw 2 log GLR draws as CSV (boundary, point-null).
    #[arg(long, value_name = "FILE")]
    pub raw_csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ReducedCommand {
    /// GLR from an accept/reject decision.
    Test(ReducedTestArgs),
    /// GLR from a one-sided normal p-value.
    Pvalue(ReducedPvalueArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    OneSided,
    PointNullOneSided,
    TwoSidedPointNull,
    Equivalence,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Outcome {
    Accept,
    Reject,
}

#[derive(Debug, Args)]
pub struct ReducedTestArgs {
    #[arg(long, value_enum)]
    pub kind: TestKind,
    #[arg(long, value_enum)]
    pub outcome: Outcome,
    /// Size of the test.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Maximum power (equivalence).
    #[arg(long)]
    pub pi_max: Option<f64>,
    /// Power table, CSV with header `theta,power` (tabulated).
    #[arg(long, value_name = "CSV")]
    pub table: Option<PathBuf>,
    /// H1 as a predicate on `theta` (tabulated).
    #[arg(long)]
    pub h1: Option<String>,
    /// H2 as a predicate on `theta` (tabulated).
    #[arg(long)]
    pub h2: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReducedPvalueArgs {
    /// The p-value.
    #[arg(long)]
    pub u: f64,
    /// H1 as a sign region of the shift `mu`, e.g. "mu <= 0".
    #[arg(long, requires = "h2")]
    pub h1: Option<String>,
    /// H2 as a sign region of the shift `mu`.
    #[arg(long, requires = "h1")]
    pub h2: Option<String>,
}
