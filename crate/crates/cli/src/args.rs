use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "nrdr", version, about = "Non-redundant spectral dimensionality reduction")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic data set and write it as CSV.
    Generate(GenerateArgs),
    /// Embed a CSV point cloud; writes projections (CSV) and a JSON summary.
    Embed(EmbedArgs),
    /// Redundancy scores, intrinsic correlations and the strip oracle for an embedding CSV.
    Diagnose(DiagnoseArgs),
    /// Nearest-neighbor classification error of embeddings of a labeled CSV.
    Classify(ClassifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Strip,
    Swissroll,
    Ring,
    Patches,
    Sprites,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Baseline,
    Nonredundant,
    Seqreg,
    Dsilva,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Lem,
    Lle,
    Isomap,
}

/// Every field is optional so that a `--config` file can fill the gaps;
/// defaults are applied after merging.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateArgs {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub manifold: Option<Manifold>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Strip length.
    #[arg(long)]
    pub l1: Option<f64>,
    /// Strip width.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Swiss-roll turns.
    #[arg(long)]
    pub turns: Option<f64>,
    /// Swiss-roll height.
    #[arg(long)]
    pub height: Option<f64>,
    /// Ring major radius.
    #[arg(long)]
    pub big_r: Option<f64>,
    /// Ring minor radius.
    #[arg(long)]
    pub small_r: Option<f64>,
    /// Grayscale image for patches: headerless CSV of pixel rows.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub patch: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Sprite canvas side in pixels.
    #[arg(long)]
    pub side: Option<usize>,
    /// Sprite pixel noise standard deviation.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedArgs {
    /// JSON file of defaults; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Number of projections.
    #[arg(long)]
    pub d: Option<usize>,
    /// Neighbors in the kNN graph.
    #[arg(long)]
    pub k: Option<usize>,
    /// Smoother bandwidth factor.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Relative singular-value cutoff for the deflation basis.
    #[arg(long)]
    pub sv_threshold: Option<f64>,
    /// Neighbors per smoother row.
    #[arg(long)]
    pub smoother_cap: Option<usize>,
    /// Seeds the eigensolver start vectors.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input point-cloud CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Projection CSV; the JSON summary goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// LEM heat-kernel width (default: mean edge length).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// LLE relative ridge.
    #[arg(long)]
    pub lle_reg: Option<f64>,
    /// Bandwidth factor for redundancy scoring.
    #[arg(long)]
    pub score_alpha: Option<f64>,
    /// Columns computed before Dsilva selection.
    #[arg(long)]
    pub d_large: Option<usize>,
    /// Dsilva score threshold.
    #[arg(long)]
    pub score_threshold: Option<f64>,
    /// Eigensolver relative residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Eigensolver budget of operator applications.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseArgs {
    /// JSON file of defaults; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Embedding CSV written by `embed`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of a text summary.
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
    /// Strip side lengths `L1,L2`; enables the strip oracle.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub strip: Option<Vec<f64>>,
    /// Intrinsic columns that are angles (0-based).
    #[arg(long, value_delimiter = ',')]
    pub angular: Option<Vec<usize>>,
    #[arg(long)]
    pub score_alpha: Option<f64>,
    #[arg(long)]
    pub smoother_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyArgs {
    /// JSON file of defaults; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Labeled CSV (needs a `label` column).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Methods to compare.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodArg>>,
    /// Embedding sizes to evaluate.
    #[arg(long, value_delimiter = ',')]
    pub d_list: Option<Vec<usize>>,
    /// Bandwidth factors tried on the tune split.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Seeds the split and the eigensolver.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the result table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
