use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "phg", version, about = "Polyharmonic Gaussian fields and multiplicative chaos on tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a discrete field and write it as a grid file.
    Sample(SampleArgs),
    /// Write a kernel profile grid and a JSON sidecar.
    Kernel(KernelArgs),
    /// Build one GMC measure and optionally its total-mass moment report.
    Gmc(GmcArgs),
    /// Exact pairing error variances over a list of lattice sides.
    ConvergeField(ConvergeFieldArgs),
    /// Common-noise hierarchical convergence table for a GMC kind.
    ConvergeMeasure(ConvergeMeasureArgs),
    /// Uniform-integrability bound table.
    Bound(BoundArgs),
    /// Log-divergence estimate of the truncated continuum kernel.
    LogDiv(LogDivArgs),
    /// Run an invariant suite and report every check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKindArg {
    Standard,
    Reduced,
    SpectrallyReduced,
}

impl From<FieldKindArg> for phg_core::FieldKind {
    fn from(k: FieldKindArg) -> Self {
        match k {
            FieldKindArg::Standard => phg_core::FieldKind::Standard,
            FieldKindArg::Reduced => phg_core::FieldKind::Reduced,
            FieldKindArg::SpectrallyReduced => phg_core::FieldKind::SpectrallyReduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Independent normals per eigenmode.
    Eigen,
    /// Grounded lattice white noise pushed through the Green power.
    WhiteNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GmcKindArg {
    Discrete,
    Semidiscrete,
    ReducedDiscrete,
    SpectrallyReducedSemidiscrete,
}

impl From<GmcKindArg> for phg_core::GmcKind {
    fn from(k: GmcKindArg) -> Self {
        match k {
            GmcKindArg::Discrete => phg_core::GmcKind::Discrete,
            GmcKindArg::Semidiscrete => phg_core::GmcKind::Semidiscrete,
            GmcKindArg::ReducedDiscrete => phg_core::GmcKind::ReducedDiscrete,
            GmcKindArg::SpectrallyReducedSemidiscrete => phg_core::GmcKind::SpectrallyReducedSemidiscrete,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKindArg {
    Disc,
    Semidisc,
    Spectred,
    Reduced,
    Plus,
    Enhanced,
    Natural,
    Flat,
    ContTrunc,
    GreenPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKindArg {
    Semidisc,
    Flat,
    Enhanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Sampling,
    Gmc,
    All,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Directory for CSV and JSON reports (CSV goes to stdout when omitted).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "standard")]
    pub kind: FieldKindArg,
    #[arg(long, value_enum, default_value = "eigen")]
    pub route: Route,
    /// Extend to an M^n grid: `fourier:M` or `pwc:M`.
    #[arg(long)]
    pub extend: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a 16-bit PGM heatmap.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub kind: KernelKindArg,
    #[arg(long)]
    pub n: usize,
    /// Lattice side (defaults to K for cont-trunc).
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Evaluation grid side (defaults to L, or K for cont-trunc).
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Cutoff for flat (default 9L) and cont-trunc.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Exponent for green-power.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GmcArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "discrete")]
    pub kind: GmcKindArg,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Atom grid file for the measure of `--seed`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integrate this test function against the measure.
    #[arg(long)]
    pub f: Option<String>,
    /// Number of seeds for the total-mass moment report (at least 1000).
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed0: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConvergeFieldArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub f: String,
    #[arg(long = "Ls", value_delimiter = ',', required = true)]
    pub ls: Vec<usize>,
    /// Odd cutoff bounding the support of f (defaults to the smallest that fits).
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConvergeMeasureArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub a: usize,
    #[arg(long)]
    pub l_max: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "discrete")]
    pub kind: GmcKindArg,
    #[arg(long)]
    pub f: String,
    /// Reference truncation (default 3 a^l_max).
    #[arg(long = "K-ref")]
    pub k_ref: Option<usize>,
    /// Common fine grid (default K_ref).
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed0: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long = "Ls", value_delimiter = ',', required = true)]
    pub ls: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "semidisc")]
    pub kinds: Vec<BoundKindArg>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LogDivArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
