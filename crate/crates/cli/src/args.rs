use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "auricle", version, about = "Electrode design, acquisition simulation and AESR analysis for full-auricle sensing")]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Size one electrode per AP so every contact area matches the target.
    Design(DesignArgs),
    /// Place template APs on a mesh.
    Place(PlaceArgs),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Normalize, reduce, cluster and score an AESR dataset.
    Analyze(AnalyzeArgs),
    /// Interpolate per-AP values over every mesh vertex.
    Contour(ContourArgs),
}

#[derive(Debug, Args)]
pub struct TemplateArg {
    /// AP template file (`label x y z` per line, coordinates in [0, 1]) or
    /// one of the bundled layouts `ap10`, `ap13`.
    #[arg(long, default_value = "ap10")]
    pub template: String,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Surface mesh (.obj or .ply, mm).
    pub mesh: PathBuf,
    #[command(flatten)]
    pub template: TemplateArg,
    /// Target contact area per electrode, mm² (default: a 3 mm disc).
    #[arg(long)]
    pub target_area: Option<f64>,
    /// Pathway tilt from the surface normal, degrees, applied at every AP.
    #[arg(long, default_value_t = 0.0)]
    pub tilt_deg: f64,
    /// Bound on the relative area spread across the array.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    pub mesh: PathBuf,
    #[command(flatten)]
    pub template: TemplateArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Two-ear cohort drawn from AESR archetypes; writes a dataset CSV.
    Cohort(CohortArgs),
    /// Four-period exercise sessions; writes session JSON.
    Session(SessionArgs),
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    /// JSON generator config; omitted fields keep their defaults.
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `label,archetype` ground truth here.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// JSON response config plus `volunteers` and `tests`.
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write period-I-normalized rows as a dataset CSV.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    /// Periods to include in `--matrix-out`.
    #[arg(long, value_delimiter = ',', default_value = "I,II,III,IV")]
    pub periods: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContourFormat {
    Ply,
    Vtk,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Dataset CSV: `label,AP1,...,APn`, `#` comments allowed.
    pub data: PathBuf,
    /// Candidate cluster counts, `MIN..MAX` (MAX is clamped to rows − 1).
    #[arg(long, default_value = "2..8")]
    pub k_range: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    /// Reference column for spatial normalization, or `none` for data that
    /// is already normalized.
    #[arg(long, default_value = "AP1")]
    pub normalize: String,
    /// Standardize columns before PCA.
    #[arg(long)]
    pub scale: bool,
    /// Cluster the normalized rows instead of the PCA scores.
    #[arg(long)]
    pub raw: bool,
    /// Keep only rows whose label starts with one of these prefixes.
    #[arg(long, value_delimiter = ',')]
    pub select: Vec<String>,
    /// Drop rows with a normalized value outside [MIN, MAX].
    #[arg(long, default_value_t = 0.05)]
    pub exclude_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub exclude_max: f64,
    #[arg(long)]
    pub no_exclude: bool,
    /// `label,value` CSV correlated against every AP column.
    #[arg(long)]
    pub covariate: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub permutations: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    pub mesh: PathBuf,
    /// AP positions as written by `place`.
    pub aps: PathBuf,
    /// `ap,value` CSV with one row per AP.
    pub values: PathBuf,
    #[arg(long, value_enum, default_value = "ply")]
    pub format: ContourFormat,
    /// Name of the scalar written per vertex.
    #[arg(long, default_value = "aesr")]
    pub field: String,
    #[arg(long)]
    pub out: PathBuf,
}
