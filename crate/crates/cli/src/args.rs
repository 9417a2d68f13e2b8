use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "routerisk", version, about = "IED risk per link and expected-utility route choice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the regional logistic model: MLE and posterior draws.
    Fit(FitArgs),
    /// Posterior probability that the next crossing of one link meets an IED.
    Assess(AssessArgs),
    /// Rank every route by expected utility.
    Plan(PlanArgs),
    /// Walk a network one crossing at a time, reading outcomes from stdin.
    Walk(WalkArgs),
    /// Recompute the bundled example and compare with the published numbers.
    Reproduce(ReproduceArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Paper,
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PocArg {
    Upheld,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Adjacent,
    Downstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LikelihoodArg {
    Adversarial,
    Conventional,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Total sweeps, burn-in included.
    #[arg(long, default_value_t = 11_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    /// Standard deviation of the Gaussian coefficient priors.
    #[arg(long, default_value_t = 10.0)]
    pub prior_sd: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Draws feeding the induced curve, or `all`.
    #[arg(long, default_value = "60")]
    pub samples: String,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Integration grid; defaults to fine unless --paper-compat is given.
    #[arg(long, value_enum)]
    pub grid: Option<GridArg>,
    /// Coarse 0.05 grid, 60 samples, window 5.
    #[arg(long)]
    pub paper_compat: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Regional CSV; the bundled twelve-bridge table when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Directory for fit.json and draws.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Link record JSON; the bundled new-bridge record when omitted.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Replaces the record's history, e.g. `0000`.
    #[arg(long)]
    pub history: Option<String>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// `uniform` or `beta:A,B`.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long, value_enum, default_value_t = LikelihoodArg::Adversarial)]
    pub likelihood: LikelihoodArg,
    /// Skip both stages and use a constant curve.
    #[arg(long)]
    pub flat_curve: bool,
    /// Also write the induced curve as CSV.
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlanInputArgs {
    /// Network JSON; the bundled A-to-I network when omitted.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Per-link probabilities JSON.
    #[arg(long, conflicts_with = "calibrate")]
    pub marginals: Option<PathBuf>,
    /// Scale one link's probability by length, as `LINK=P`.
    #[arg(long)]
    pub calibrate: Option<String>,
    /// Round scaled probabilities to two decimals.
    #[arg(long, requires = "calibrate")]
    pub round: bool,
    /// Dependency model JSON; independence when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Length-penalty utility parameter; binary utility when omitted.
    #[arg(long)]
    pub x_util: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub input: PlanInputArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub input: PlanInputArgs,
    #[arg(long, value_enum, default_value_t = PocArg::Upheld)]
    pub poc: PocArg,
    #[arg(long, default_value_t = 1.0)]
    pub w_clear: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w_incident: f64,
    #[arg(long, value_enum, default_value_t = ScopeArg::Adjacent)]
    pub scope: ScopeArg,
    /// Write the final session document here.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// First seed; statistical rows use this and the following ones.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub chains: u64,
    #[arg(long, default_value_t = 11_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    /// Check the closed-form rows with fine integration.
    #[arg(long)]
    pub fine_integration: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, default_value = "sessions")]
    pub sessions: PathBuf,
}
