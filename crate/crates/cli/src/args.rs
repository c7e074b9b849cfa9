use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use shapes::{EndKnots, KnotAdjust, Label, MapKind, ShapesConfig64};

#[derive(Debug, Parser)]
#[command(name = "shapes", version, about = "Adaptive spline fitting with swarm-optimized knots")]
pub struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a two-column (x, y) CSV file.
    Fit(FitArgs),
    /// Run a Monte Carlo campaign on a benchmark.
    Simulate(SimulateArgs),
    /// List the benchmark functions or dump one of them.
    Benchmarks(BenchmarksArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MapArg {
    Plain,
    CenteredMonotonic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EndKnotsArg {
    Fixed,
    Variable,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EndBsplinesArg {
    Keep,
    Drop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdjustArg {
    Merge,
    Heal,
}

/// Algorithm settings, given either as a key string or as individual flags.
#[derive(Debug, Args)]
pub struct SettingsArgs {
    /// Key string such as LP_100_0.1_100_FKM.
    #[arg(long, conflicts_with_all = ["lambda", "iterations", "map", "end_knots", "end_bsplines", "adjust"])]
    pub label: Option<String>,
    /// Regulator gain.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Swarm iterations per run.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub map: Option<MapArg>,
    #[arg(long, value_enum)]
    pub end_knots: Option<EndKnotsArg>,
    #[arg(long, value_enum)]
    pub end_bsplines: Option<EndBsplinesArg>,
    #[arg(long, value_enum)]
    pub adjust: Option<AdjustArg>,
    /// Comma separated candidate knot counts.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<usize>>,
    /// Independent swarm runs per model.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Swarm run r uses seed SEED + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_bias_correction: bool,
}

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_ITERATIONS: usize = 100;

impl SettingsArgs {
    /// Builds the pipeline settings. Returns the parsed label, if any, so the
    /// caller can reconcile its SNR.
    pub fn config(&self) -> anyhow::Result<(ShapesConfig64, Option<Label>)> {
        let (mut config, label) = match &self.label {
            Some(s) => {
                let label = Label::parse(s)?;
                (label.config(), Some(label))
            }
            None => {
                let mut c = ShapesConfig64::new(
                    self.lambda.unwrap_or(DEFAULT_LAMBDA),
                    self.iterations.unwrap_or(DEFAULT_ITERATIONS),
                );
                if let Some(m) = self.map {
                    c.knots.map_kind = match m {
                        MapArg::Plain => MapKind::Plain,
                        MapArg::CenteredMonotonic => MapKind::CenteredMonotonic,
                    };
                }
                if let Some(e) = self.end_knots {
                    c.knots.end_knots = match e {
                        EndKnotsArg::Fixed => EndKnots::Fixed,
                        EndKnotsArg::Variable => EndKnots::Variable,
                    };
                }
                if let Some(b) = self.end_bsplines {
                    c.drop_end_bsplines = matches!(b, EndBsplinesArg::Drop);
                }
                if let Some(a) = self.adjust {
                    c.knots.adjust = match a {
                        AdjustArg::Merge => KnotAdjust::Merge,
                        AdjustArg::Heal => KnotAdjust::Heal,
                    };
                }
                (c, None)
            }
        };
        if let Some(models) = &self.models {
            let mut models = models.clone();
            models.sort_unstable();
            models.dedup();
            config.model_set = models;
        }
        if let Some(runs) = self.runs {
            config.num_runs = runs;
        }
        config.seed_base = self.seed;
        config.bias_correction = !self.no_bias_correction;
        config.validate().context("settings")?;
        Ok((config, label))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with columns x, y (header optional).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output directory for estimate.csv and model.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Campaign file (JSON or TOML) instead of the flags below.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["benchmark", "snr", "label", "lambda", "iterations", "map", "end_knots", "end_bsplines", "adjust"])]
    pub spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "spec")]
    pub benchmark: Option<String>,
    /// Signal to noise ratio; taken from the label when omitted.
    #[arg(long)]
    pub snr: Option<f64>,
    /// Number of realizations.
    #[arg(long = "nr", visible_alias = "n", conflicts_with = "full_scale")]
    pub num_realizations: Option<usize>,
    /// Use the full-size realization count.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub bootstrap_seed: Option<u64>,
    /// Directory for summary.json and records.csv; the summary goes to
    /// stdout when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub settings: SettingsArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarksArgs {
    /// Benchmark to write as CSV (x, f(x)).
    #[arg(long, value_name = "NAME")]
    pub dump: Option<String>,
    #[arg(long, default_value_t = 256, requires = "dump")]
    pub points: usize,
    /// Scale the samples to this SNR instead of the raw formula values.
    #[arg(long, requires = "dump")]
    pub snr: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE", requires = "dump")]
    pub out: Option<PathBuf>,
}

pub fn check_snr(label: Option<&Label>, snr: Option<f64>) -> anyhow::Result<f64> {
    match (label, snr) {
        (Some(l), Some(s)) if l.snr != s => bail!("--snr {s} disagrees with label SNR {}", l.snr),
        (Some(l), _) => Ok(l.snr),
        (None, Some(s)) => Ok(s),
        (None, None) => bail!("--snr is required without --label"),
    }
}
