use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ssakit", version, about = "Singular spectrum analysis of time series")]
pub struct Cli {
    /// Write reports as JSON instead of CSV or text tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Output file; standard output when omitted.
    #[arg(short = 'o', long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Leading eigentriples of the trajectory matrix as a JSON document.
    Decompose(DecomposeArgs),
    /// Grouped reconstruction from a series or a saved decomposition.
    Reconstruct(ReconstructArgs),
    /// Weighted correlations between elementary reconstructed components.
    Wcor(WcorArgs),
    /// Automatic grouping by trend and harmonic detection or by clustering.
    Autogroup(AutogroupArgs),
    /// Recurrent or vector forecast, optionally with bootstrap intervals.
    Forecast(ForecastArgs),
    /// Fills missing samples (empty or NA cells).
    Gapfill(GapfillArgs),
    /// Roots and real-form parameters of the signal model.
    Estimate(EstimateArgs),
    /// Cadzow iterations towards a finite-rank series.
    Cadzow(CadzowArgs),
    /// Rank selection by information criteria.
    Rank(RankArgs),
    /// Monte Carlo test against red noise.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// CSV series (first column, optional header); reconstruct and wcor also
    /// accept a decomposition JSON document.
    pub input: PathBuf,

    /// Window length L; a method-specific default when omitted.
    #[arg(short = 'L', long)]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Basic,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CenteringArg {
    None,
    Double,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: Source,

    /// Number of eigentriples to compute.
    #[arg(short = 'k', long, default_value_t = 10)]
    pub components: usize,

    #[arg(long, value_enum, default_value_t = MethodArg::Basic)]
    pub method: MethodArg,

    #[arg(long, value_enum, default_value_t = CenteringArg::None)]
    pub centering: CenteringArg,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub decompose: DecomposeArgs,

    /// Grouping JSON file mapping names to 1-based indices.
    #[arg(long, conflicts_with = "group")]
    pub grouping: Option<PathBuf>,

    /// Inline group `name=1,2,3`; repeatable. Without any grouping all
    /// components form one group named `signal`.
    #[arg(long)]
    pub group: Vec<String>,
}

#[derive(Debug, Args)]
pub struct WcorArgs {
    #[command(flatten)]
    pub decompose: DecomposeArgs,

    /// Use only the first m components.
    #[arg(long)]
    pub up_to: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AutogroupArgs {
    #[command(flatten)]
    pub decompose: DecomposeArgs,

    /// Cluster the w-correlation matrix into this many groups instead of
    /// detecting trend and harmonics.
    #[arg(long)]
    pub clusters: Option<usize>,

    /// Trend cutoff frequency.
    #[arg(long, default_value_t = ssakit::grouping::DEFAULT_TREND_FREQUENCY)]
    pub omega0: f64,

    /// Minimum low-frequency periodogram share of a trend eigenvector.
    #[arg(long, default_value_t = ssakit::grouping::DEFAULT_TREND_THRESHOLD)]
    pub trend_threshold: f64,

    /// Frequency tolerance for harmonic pairs; one periodogram bin (1/L) by default.
    #[arg(long)]
    pub freq_tol: Option<f64>,

    /// Minimum peak share of each eigenvector of a harmonic pair.
    #[arg(long, default_value_t = 0.8)]
    pub share: f64,
}

/// Components used as the signal: the leading `rank` or an explicit list.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Selection {
    /// Use components 1..=r.
    #[arg(short = 'r', long)]
    pub rank: Option<usize>,

    /// Comma-separated 1-based component indices.
    #[arg(long, value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ForecastMethodArg {
    Recurrent,
    Vector,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntervalKindArg {
    Prediction,
    Confidence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Resample,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub source: Source,

    #[command(flatten)]
    pub selection: Selection,

    #[arg(short = 'H', long)]
    pub horizon: usize,

    #[arg(long, value_enum, default_value_t = ForecastMethodArg::Recurrent)]
    pub method: ForecastMethodArg,

    /// Add bootstrap intervals.
    #[arg(long)]
    pub intervals: bool,

    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Bootstrap replications B.
    #[arg(short = 'B', long, default_value_t = 200)]
    pub bootstrap: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = IntervalKindArg::Prediction)]
    pub interval_kind: IntervalKindArg,

    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GapfillMethodArg {
    Iterative,
    Subspace,
}

#[derive(Debug, Args)]
pub struct GapfillArgs {
    #[command(flatten)]
    pub source: Source,

    #[arg(short = 'r', long)]
    pub rank: usize,

    #[arg(long, value_enum, default_value_t = GapfillMethodArg::Iterative)]
    pub method: GapfillMethodArg,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RootsArg {
    Esprit,
    Lrr,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: Source,

    #[command(flatten)]
    pub selection: Selection,

    /// Root finder: ESPRIT, or the characteristic polynomial of the
    /// min-norm recurrence (largest-modulus roots kept).
    #[arg(long, value_enum, default_value_t = RootsArg::Esprit)]
    pub roots: RootsArg,
}

#[derive(Debug, Args)]
pub struct CadzowArgs {
    #[command(flatten)]
    pub source: Source,

    #[arg(short = 'r', long)]
    pub rank: usize,

    #[arg(long, default_value_t = ssakit::lowrank::DEFAULT_CADZOW_ITERATIONS)]
    pub max_iter: usize,

    #[arg(long, default_value_t = ssakit::lowrank::DEFAULT_CADZOW_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Cadzow,
    Ssa,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub source: Source,

    /// Largest rank scored.
    #[arg(short = 'r', long)]
    pub rank: usize,

    #[arg(long, value_enum, default_value_t = CriterionArg::Bic)]
    pub criterion: CriterionArg,

    #[arg(long, value_enum, default_value_t = EstimatorArg::Cadzow)]
    pub estimator: EstimatorArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorrectionArg {
    None,
    Bonferroni,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: Source,

    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,

    #[arg(short = 'B', long, default_value_t = 1000)]
    pub surrogates: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = CorrectionArg::Bonferroni)]
    pub correction: CorrectionArg,

    /// Test only the first m eigenvectors.
    #[arg(short = 'k', long)]
    pub components: Option<usize>,
}
