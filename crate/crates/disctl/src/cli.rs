use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use security::Protocol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "disctl", version, about = "Device-independent state certification toolkit")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "DISC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Certified lower bound on extractability from a grid of SDP solves.
    Extract(ExtractArgs),
    /// Soundness and completeness errors for one protocol configuration.
    Security(SecurityArgs),
    /// Monte Carlo protocol runs.
    Simulate(SimulateArgs),
    /// CSV data for the standard plots.
    Figures(FiguresArgs),
    /// Re-run a recorded command and compare output hashes.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract(_) => "extract",
            Command::Security(_) => "security",
            Command::Simulate(_) => "simulate",
            Command::Figures(_) => "figures",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Paper,
    Tight,
}

impl From<Mode> for extract::PenaltyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Paper => extract::PenaltyMode::Paper,
            Mode::Tight => extract::PenaltyMode::Tight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Paper,
    Rigorous,
}

impl From<Bound> for security::BoundMode {
    fn from(b: Bound) -> Self {
        match b {
            Bound::Paper => security::BoundMode::Paper,
            Bound::Rigorous => security::BoundMode::Rigorous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExtractArgs {
    /// `chsh` or a functional JSON file.
    #[arg(long, default_value = "chsh")]
    pub bell: String,
    /// Angle grid spacing δ.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Mode::Paper)]
    pub mode: Mode,
    /// Number of evenly spaced ω knots from the local to the quantum bound.
    #[arg(long, default_value_t = 33)]
    pub knots: usize,
    /// Curve JSON; the CSV and manifest are written next to it.
    #[arg(long, default_value = "curve.json")]
    pub out: PathBuf,
}

/// A completeness parameter: fixed, or solved from a target ε_c.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KappaArgs {
    #[arg(long, conflicts_with = "target_eps_c")]
    pub kappa: Option<f64>,
    /// Solve κ so that the completeness error equals this (default 1e-2).
    #[arg(long)]
    pub target_eps_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SecurityArgs {
    /// P1..P5 (or 1..5).
    #[arg(long)]
    pub protocol: Protocol,
    /// Round count; a comma-separated list produces a sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    /// ω♯ for P1–P3, the winning probability p♯ for P4–P5.
    #[arg(long, visible_alias = "p-sharp")]
    pub omega_sharp: f64,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Curve JSON, or `bardyn` / `kaniewski` for the closed-form curves.
    #[arg(long, default_value = "bardyn")]
    pub curve: String,
    #[arg(long, default_value = "chsh")]
    pub bell: String,
    #[arg(long, value_enum, default_value_t = Bound::Paper)]
    pub bound_mode: Bound,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceChoice {
    Optimal,
    Anti,
    AbortAttack,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Scenario JSON; replaces the protocol, source and device flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = "P2")]
    pub protocol: Protocol,
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long, visible_alias = "p-sharp", default_value_t = 2.0 * std::f64::consts::SQRT_2)]
    pub omega_sharp: f64,
    #[command(flatten)]
    pub kappa: KappaArgs,
    #[arg(long, default_value = "chsh")]
    pub bell: String,
    /// Bound used when solving κ from --target-eps-c.
    #[arg(long, value_enum, default_value_t = Bound::Rigorous)]
    pub bound_mode: Bound,
    /// Isotropic noise weight μ of the honest source.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t = DeviceChoice::Optimal)]
    pub device: DeviceChoice,
    /// Round holding the separable state for --device abort-attack.
    #[arg(long, default_value_t = 0)]
    pub t_sep: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sim")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// G_ε for ε ∈ {0, 0.05, 0.1, 0.15}.
    GEps,
    /// ε_s against n at fixed ω♯ and at fixed ε.
    EpsVsN,
    /// Numeric extractability at several δ against the closed forms.
    XiVsAnalytic,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub which: Figure,
    #[arg(long, default_value = "chsh")]
    pub bell: String,
    /// Grid spacings for xi-vs-analytic.
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.01")]
    pub delta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Paper)]
    pub mode: Mode,
    /// ω knots for xi-vs-analytic.
    #[arg(long, default_value_t = 17)]
    pub knots: usize,
    #[arg(long, default_value = "bardyn")]
    pub curve: String,
    #[arg(long, default_value = "P2")]
    pub protocol: Protocol,
    #[arg(long, value_enum, default_value_t = Bound::Paper)]
    pub bound_mode: Bound,
    #[arg(long, default_value_t = 1e-2)]
    pub target_eps_c: f64,
    /// ω♯ held fixed in the ε_s-vs-n family.
    #[arg(long, default_value_t = 2.82)]
    pub omega_sharp: f64,
    /// ε held fixed in the ε_s-vs-n family.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value = "figures")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}
