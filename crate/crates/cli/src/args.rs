use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "eulersurf", version, about = "Euler characteristic curves, surfaces and terrains")]
pub struct Cli {
    /// Worker threads for engine calls; defaults to the available cores.
    #[arg(long, global = true, env = "EULERSURF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Euler characteristic curve of an image's intensity filtration.
    Ecc(EccArgs),
    /// Euler characteristic surface of an image pair.
    Ecs(EcsArgs),
    /// Euler characteristic curve of a point-cloud filtration.
    EccPoints(EccPointsArgs),
    /// Euler characteristic surface of a point-cloud bifiltration.
    EcsPoints(EcsPointsArgs),
    /// Difference of two ensembles of surfaces.
    Terrain(TerrainArgs),
    /// Analytic expected surface of a correlated random image pair.
    Expected(ExpectedArgs),
    /// Subsampled, optionally z-normalized feature vectors.
    Featurize(FeaturizeArgs),
    /// Seeded synthetic data.
    Gen(GenArgs),
    /// Compare fast algorithms against brute-force recounts on random inputs.
    OracleCheck(OracleCheckArgs),
    /// Time the fast image-pair algorithm against the brute-force recount.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutFormat {
    Csv,
    PgmHeatmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode3d {
    /// Evaluate each 3D neighborhood on demand.
    Direct,
    /// Precompute all 2^26 neighborhoods (cached on disk with --table-cache).
    Eager,
}

#[derive(Debug, Args, Serialize)]
pub struct ImageOptions {
    /// Intensity levels for PGM input; EUVOL files carry their own.
    #[arg(long, default_value_t = 256)]
    pub levels: u32,
    /// How 3D neighborhood changes are evaluated.
    #[arg(long, value_enum, default_value_t = Mode3d::Direct)]
    pub mode_3d: Mode3d,
    /// Cache file for the eager 3D change table.
    #[arg(long)]
    pub table_cache: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputOptions {
    /// Output file; CSV goes to stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    pub out: OutFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct EccArgs {
    /// PGM (P2/P5) or EUVOL image.
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub image_options: ImageOptions,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also recount by brute force and report mismatches.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EcsArgs {
    #[arg(long)]
    pub image1: PathBuf,
    #[arg(long, required_unless_present = "derived", conflicts_with = "derived")]
    pub image2: Option<PathBuf>,
    /// Build the second image from the first: laplacian, complement,
    /// gradient or radial.
    #[arg(long)]
    pub derived: Option<String>,
    #[command(flatten)]
    pub image_options: ImageOptions,
    #[command(flatten)]
    pub output: OutputOptions,
    /// Also recount by brute force and report mismatches.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PointsInput {
    /// CSV of `x,y[,z]` rows.
    #[arg(long)]
    pub points: PathBuf,
    /// `delaunay` (planar) or `rips:<radius>[:<max_dim>]`.
    #[arg(long, default_value = "delaunay")]
    pub complex: String,
    /// Perturb points by a seeded 1e-9 relative jitter before triangulating.
    #[arg(long)]
    pub jitter_seed: Option<u64>,
    /// `unique`, `uniform:<count>` or `range:<lo>:<hi>:<count>`.
    #[arg(long, default_value = "unique")]
    pub grid: String,
    /// Write the filtered complex in the EULERCPLX text format.
    #[arg(long)]
    pub export_complex: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EccPointsArgs {
    #[command(flatten)]
    pub input: PointsInput,
    /// Filtering function: `alpha`, `rips`, `knn:k=<k>` or `height:<dx>,<dy>[,<dz>]`.
    #[arg(long)]
    pub h: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EcsPointsArgs {
    #[command(flatten)]
    pub input: PointsInput,
    /// First filtering function (see `ecc-points --h`).
    #[arg(long)]
    pub h1: String,
    /// Second filtering function.
    #[arg(long)]
    pub h2: String,
    /// Grid for the second parameter; defaults to `--grid`.
    #[arg(long)]
    pub grid2: Option<String>,
    #[command(flatten)]
    pub output: OutputOptions,
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TerrainArgs {
    /// Directory of surface CSVs for the first ensemble.
    #[arg(long)]
    pub a: PathBuf,
    /// Directory of surface CSVs for the second ensemble.
    #[arg(long)]
    pub b: PathBuf,
    /// Divide by the sum of pointwise standard deviations.
    #[arg(long)]
    pub normalized: bool,
    /// Report absolute values.
    #[arg(long)]
    pub abs: bool,
    /// Print a summary of cells with |value| >= this threshold.
    #[arg(long)]
    pub region: Option<f64>,
    #[command(flatten)]
    pub output: OutputOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpectedArgs {
    #[arg(long, default_value_t = 32)]
    pub n1: usize,
    #[arg(long, default_value_t = 32)]
    pub n2: usize,
    /// Probability that a pixel shares its value across the two images.
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 256)]
    pub levels: u32,
    #[command(flatten)]
    pub output: OutputOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturizeArgs {
    /// Curve or surface CSV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub stride: usize,
    /// Fit z-score parameters over the inputs and write them as JSON.
    #[arg(long, conflicts_with = "apply")]
    pub fit: Option<PathBuf>,
    /// Apply z-score parameters read from JSON.
    #[arg(long)]
    pub apply: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[command(subcommand)]
    pub model: GenModel,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum GenModel {
    /// Correlated pair of uniform random images.
    Pair {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: usize,
        /// Second extent; defaults to `--n`.
        #[arg(long)]
        n2: Option<usize>,
        #[arg(long, default_value_t = 256)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The two output PGM files.
        #[arg(long, num_args = 2, required = true)]
        out: Vec<PathBuf>,
    },
    /// Pair of 3D volumes from a Clayton copula.
    Copula3d {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        levels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The two output EUVOL files.
        #[arg(long, num_args = 2, required = true)]
        out: Vec<PathBuf>,
    },
    /// Clayton copula samples with uniform marginals on [0, scale).
    Clayton {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Poisson process on the unit square.
    Poisson {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hawkes cluster process seeded on the unit square.
    Hawkes {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        sigma: f64,
        /// Discard points outside the unit square.
        #[arg(long)]
        clip: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct OracleCheckArgs {
    #[arg(long, default_value_t = 25)]
    pub trials: usize,
    /// Largest image side.
    #[arg(long, default_value_t = 12)]
    pub size: usize,
    #[arg(long, default_value_t = 16)]
    pub levels: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 64)]
    pub levels: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed repetitions of the fast algorithm (the median is reported).
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
}
