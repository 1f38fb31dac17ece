//! Command-line surface. Every parameter is optional at parse time so that a
//! `--config` file can supply it; flags given explicitly win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "flowgrowth",
    version,
    about = "Growth-rate bounds for spatial derivatives of stochastic flows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration (a bare parameter object, a run config, or a
    /// previously emitted report).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for simulations (results do not depend on it).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Svg,
    /// Binary ensemble layout (`FGEN1`).
    Bin,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Bin => "bin",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Growth-rate bound from the closed form.
    Xi(XiArgs),
    /// Growth-rate bound from the two numeric oracles.
    XiOracle(XiOracleArgs),
    /// Gronwall-type closed form for constant forcing, optionally with the Picard oracle.
    Gronwall(GronwallArgs),
    /// Moment rates from characteristic bounds and a Hölder split.
    Constants(ConstantsArgs),
    /// Hölder split minimizing the growth-rate bound.
    Optimize(OptimizeArgs),
    /// Isotropic Brownian flow model, its constants and growth-rate bound.
    Ibf(IbfArgs),
    /// Euler–Maruyama ensemble of the two-point distance.
    SimulateRho(SimArgs),
    /// Exact ensemble of the log Schatten norm of the derivative.
    SimulateDerivative(SimArgs),
    /// Simulation-backed consistency report.
    Verify(VerifyArgs),
    /// Box-counting dimension of a point cloud or generated set.
    Boxdim(BoxdimArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Xi(_) => "xi",
            Command::XiOracle(_) => "xi-oracle",
            Command::Gronwall(_) => "gronwall",
            Command::Constants(_) => "constants",
            Command::Optimize(_) => "optimize",
            Command::Ibf(_) => "ibf",
            Command::SimulateRho(_) => "simulate-rho",
            Command::SimulateDerivative(_) => "simulate-derivative",
            Command::Verify(_) => "verify",
            Command::Boxdim(_) => "boxdim",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// c-hat
    #[arg(long, allow_negative_numbers = true)]
    pub chat: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// k-hat
    #[arg(long, allow_negative_numbers = true)]
    pub khat: Option<f64>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Box dimension of the set of initial points.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaArg {
    Corrected,
    AsPrinted,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct XiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rate: RateArgs,
    #[arg(long, value_enum)]
    pub formula: Option<FormulaArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct XiOracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rate: RateArgs,
    /// Absolute tolerance on xi.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GronwallArgs {
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Constant forcing H.
    #[arg(long)]
    pub h: Option<f64>,
    /// Forcing read from a moment-curve CSV instead of a constant.
    #[arg(long)]
    pub h_csv: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Intervals of the output grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also solve the integral equation by Picard iteration.
    #[arg(long)]
    pub picard: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundsArgs {
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub k3: Option<f64>,
    #[arg(long)]
    pub k4: Option<f64>,
    /// Lambda of the two-point moment estimate.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub c_bar: Option<f64>,
    #[arg(long)]
    pub d: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SplitArgs {
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub alpha3: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta3: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConstantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub bounds: BoundsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub split: SplitArgs,
    /// Box dimension; when given the growth-rate bound is reported too.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Moment order for the derivative bound curves.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Separation of the two points in the two-point bound curve.
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub bounds: BoundsArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Objective evaluations.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelArgs {
    /// Catalog id: potential-gaussian or user-table.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Correlation table CSV (columns r, B_L, B_N) for user-table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub beta_l: Option<f64>,
    #[arg(long)]
    pub beta_n: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IbfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimConfigArgs {
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Mandatory for every simulation.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimConfigArgs,
    /// Moment orders summarized in JSON output.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimConfigArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetArg {
    CantorDust,
    GridCube,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoxdimArgs {
    /// Point cloud CSV (one point per row, no header).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generate a set instead of reading one.
    #[arg(long, value_enum)]
    pub generate: Option<SetArg>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Contraction ratio of the Cantor dust.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// 1-based active axes of the Cantor dust.
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<usize>>,
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Explicit decreasing box sizes.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
}
