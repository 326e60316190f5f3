use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "dcorgraph",
    version,
    about = "Distance-correlation graph structure learning"
)]
pub struct Cli {
    /// Worker threads for the pairwise loops (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a graph from a data CSV.
    Estimate(EstimateArgs),
    /// Generate an Erdős–Rényi ground truth and a dataset drawn along it.
    Simulate(SimulateArgs),
    /// Hamming distance between two edge-list files.
    Eval(EvalArgs),
    /// Log-determinants of Pearson and distance-correlation matrices by dimension.
    BenchDet(BenchDetArgs),
    /// Log-ratio returns plus standardization of a price CSV.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// First line holds column names.
    #[arg(long)]
    pub header: bool,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Columns to keep: `START..END` (0-based, half-open) or a comma list of names/indices.
    #[arg(long)]
    pub select: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMatrix {
    /// Partial correlations from the inverted distance-correlation matrix.
    Partial,
    /// The distance-correlation matrix itself.
    Dcor,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).multiple(false)))]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,

    /// Keep edges with |entry| > TP.
    #[arg(long, group = "mode")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp: Option<f64>,

    /// Keep the K strongest edges.
    #[arg(long = "edges", group = "mode")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,

    /// Comma-separated decreasing thresholds, or `auto` (40 geometric steps down to 5% of the max).
    #[arg(long, group = "mode")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<String>,

    #[arg(long, value_enum, default_value_t = ThresholdMatrix::Partial)]
    pub threshold_matrix: ThresholdMatrix,

    #[arg(long, default_value_t = 1e-8)]
    pub ridge_step: f64,

    #[arg(long = "ridge-max", default_value_t = 1e-2)]
    pub ridge_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Noise {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub nodes: usize,

    #[arg(long)]
    pub avg_degree: f64,

    #[arg(long)]
    pub samples: usize,

    #[arg(long)]
    pub seed: u64,

    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,

    /// Coefficient magnitude bounds `LOW,HIGH`.
    #[arg(long, default_value = "0.3,0.9")]
    pub coef_range: String,

    #[arg(long, value_enum, default_value_t = Noise::Gaussian)]
    pub noise: Noise,

    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Ground-truth edge list.
    #[arg(long)]
    pub truth: PathBuf,

    /// Estimated edge list.
    #[arg(long)]
    pub estimated: PathBuf,

    /// Node count, overriding the `# nodes:` headers.
    #[arg(long)]
    pub nodes: Option<usize>,

    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Gaussian,
    Uniform,
    Exponential,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchDetArgs {
    /// Dimensions: comma list of `P` or inclusive ranges `A-B`, e.g. `2-100`.
    #[arg(long)]
    pub dims: String,

    #[arg(long)]
    pub samples: usize,

    #[arg(long)]
    pub reps: usize,

    #[arg(long)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Distribution::Gaussian)]
    pub distribution: Distribution,

    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    #[serde(skip)]
    pub output_dir: PathBuf,
}
