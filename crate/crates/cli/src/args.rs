use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfqvar::data::YearMonth;

#[derive(Debug, Parser)]
#[command(name = "mfqvar", version, about = "Mixed-frequency quantile VAR nowcasting")]
pub struct Cli {
    /// Output directory [default: $MFQVAR_OUTPUT_ROOT/<command>, or ./mfqvar-out/<command>]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a vintage file against a configuration
    Validate(InputArgs),
    /// Run the Gibbs sampler and store the chains
    Fit(FitArgs),
    /// Nowcast the target series at one or more origins
    Nowcast(NowcastArgs),
    /// Compare nowcasts with and without a shock to one series
    Counterfactual(CounterfactualArgs),
    /// Write a synthetic dataset
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Fit(_) => "fit",
            Command::Nowcast(_) => "nowcast",
            Command::Counterfactual(_) => "counterfactual",
            Command::Simulate(_) => "simulate",
        }
    }
}

/// `YYYY-MM`, or an inclusive range `YYYY-MM:YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Origins {
    pub first: YearMonth,
    pub last: YearMonth,
}

impl Origins {
    pub fn months(self) -> Vec<YearMonth> {
        (0..=self.first.months_until(self.last)).map(|k| self.first.plus(k)).collect()
    }
}

impl FromStr for Origins {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').unwrap_or((s, s));
        let first: YearMonth = a.parse().map_err(|e| format!("{e}"))?;
        let last: YearMonth = b.parse().map_err(|e| format!("{e}"))?;
        if last < first {
            return Err(format!("origin range {s} runs backwards"));
        }
        Ok(Self { first, last })
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Vintage file (series_id,date,value,vintage_date)
    #[arg(long)]
    pub data: PathBuf,
    /// Model configuration (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Forecast origin(s) [default: latest month with monthly data]
    #[arg(long)]
    pub origin: Option<Origins>,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Quantile levels, each fitted as its own run with that level for every series
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct NowcastArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Output directory of an earlier `fit`; fits afresh when absent
    #[arg(long)]
    pub fit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CounterfactualArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    pub shock_series: String,
    /// In in-sample standard deviations
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub shock_size: f64,
    /// Number of final months shocked
    #[arg(long, default_value_t = 3)]
    pub shock_window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Eight monthly indicators and quarterly GDP, 2010–2019
    Miniature,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with = "dgp", required_unless_present = "dgp")]
    pub preset: Option<Preset>,
    /// Data-generating process as JSON
    #[arg(long)]
    pub dgp: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}
