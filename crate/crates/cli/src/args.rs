use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "spinsq",
    version,
    about = "Estimate and plan spin-squeezing inequality tests"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one measurement pattern and write its dataset
    Sample(SampleArgs),
    /// Evaluate a parameter estimate from dataset files
    Estimate(EstimateArgs),
    /// Analytic variance of an estimate for a state model
    Variance(VarianceArgs),
    /// Smallest budget that certifies a violation by margin t
    Samplesize(SampleSizeArgs),
    /// Monte Carlo trials of an estimator
    Mc(McArgs),
    /// Regenerate the data behind a table or figure
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternArg {
    #[value(alias = "total-spin")]
    Ts,
    #[value(alias = "all-pairs")]
    Ap,
    #[value(alias = "split-single")]
    ApSplit,
    #[value(alias = "random-pairs")]
    Rp,
    #[value(alias = "random-split")]
    RpSplit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Table2,
    Fig8,
    Fig9,
}

/// Where and how results are written. Not part of the configuration hash.
#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    /// family:N[:m][:p], e.g. dicke:10:5, singlet:8:0.9, mixed:6
    #[arg(long)]
    pub state: String,
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    #[arg(long)]
    pub k: u64,
    /// Number of random slots (random patterns only)
    #[arg(long)]
    pub l: Option<u64>,
    /// Directions measured by the split patterns
    #[arg(long, default_value = "xyz")]
    pub axes: String,
    #[arg(long, env = "SPINSQ_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub scheme: String,
    /// a|b|c|d with optional axes, e.g. c or d:kzlxmy
    #[arg(long)]
    pub param: String,
    /// Dataset files written by `sample`
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// State model used as the variance source for the p-value bound
    #[arg(long, conflicts_with = "variance")]
    pub state: Option<String>,
    /// Known estimator variance used for the p-value bound
    #[arg(long)]
    pub variance: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct VarianceArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub scheme: String,
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub l: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleSizeArgs {
    #[arg(long, default_value = "c")]
    pub param: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Violation margin: an absolute number or a multiple of N/2 like 0.1halfN
    #[arg(long, default_value = "0.1halfN")]
    pub t_rule: String,
    /// Restrict to one scheme (default: all five)
    #[arg(long)]
    pub scheme: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct McArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub scheme: String,
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub l: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, env = "SPINSQ_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Histogram bin width (default: 8 standard deviations over all bins)
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Relative tolerance for the empirical/analytic variance comparison
    #[arg(long, default_value_t = spinsq_core::montecarlo::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Worker threads, 0 = one per core
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = "c")]
    pub param: String,
    /// Qubit number for fig8
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Visibility grid step for fig8
    #[arg(long, default_value_t = 0.01)]
    pub p_step: f64,
    /// Also simulate every fig8 grid point with this many trials
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, env = "SPINSQ_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, default_value = "0.1halfN")]
    pub t_rule: String,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

/// Splices `key = value` lines from a `--config` file into the argument list
/// right after the subcommand, so that flags given on the command line,
/// which come later, take precedence.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = Some(iter.next().ok_or("--config needs a file path")?);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut spliced = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key = value", lineno + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "files" {
            spliced.extend(value.split_whitespace().map(str::to_string));
        } else {
            spliced.push(format!("--{key}"));
            spliced.push(value.to_string());
        }
    }
    // subcommand is the first argument after the program name that is not a flag
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    rest.splice(at..at, spliced);
    Ok(rest)
}
