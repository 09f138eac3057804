use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

/// Semiclassical vs quantum polarization correlations: figure data,
/// virtual experiment, and self-checks.
#[derive(Debug, Parser)]
#[command(name = "polcorr", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Gauss–Legendre nodes per Euler angle.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for any flag; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<RunMode>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coincidence probability vs analyzer angle, normalized by p_tot.
    Figure1(Figure1Args),
    /// Visibility of the anticorrelated pair vs intensity.
    Figure2(Figure2Args),
    /// Upper bound on the visibility over (|s_a|, |s_b|).
    Figure3(Figure3Args),
    /// Bloch-vector path drawn by the rotating-waveplate depolarizer.
    Figure4(DepolarizerArgs),
    /// Six-setting virtual experiment with sinusoid fits.
    Experiment(ExperimentArgs),
    /// Run the invariant checks and report measured values.
    Validate(ValidateArgs),
}

#[derive(Debug, Default, Args)]
pub struct Figure1Args {
    /// Beam intensities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s_values: Option<Vec<f64>>,
    /// Analyzer angles in [0, π], endpoints included.
    #[arg(long)]
    pub alpha_points: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct Figure2Args {
    #[arg(long)]
    pub s_min: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Log-spaced points between s_min and s_max.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct Figure3Args {
    /// Points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
}

#[derive(Debug, Default, Clone, Args)]
pub struct DepolarizerArgs {
    /// Points along one period, both endpoints included.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub plate_order: Option<PlateOrderArg>,
    /// Bloch angle (rad) of the linear input polarization from H towards D.
    #[arg(long)]
    pub input_angle: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// Pulse repetition rate, Hz.
    #[arg(long)]
    pub rep_rate: Option<f64>,
    /// Counting time per analyzer setting, s.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Mean photon number per pulse per beam.
    #[arg(long)]
    pub intensity: Option<f64>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Plate revolutions per setting.
    #[arg(long)]
    pub rotations: Option<u32>,
    /// Stochastic mode draws every k-th pulse.
    #[arg(long)]
    pub subsample: Option<u64>,
    /// Time samples per depolarizer period (expectation mode).
    #[arg(long)]
    pub time_samples: Option<usize>,
    /// Analyzer step along the great circle, degrees.
    #[arg(long)]
    pub step_deg: Option<f64>,
    #[arg(long, value_enum)]
    pub plate_order: Option<PlateOrderArg>,
    #[arg(long)]
    pub input_angle: Option<f64>,
    /// Where to write the JSON fit summary (stderr when omitted).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Expectation,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateOrderArg {
    HalfWaveFirst,
    MagicFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Core,
    Quantum,
    Semiclassical,
    Optics,
    Experiment,
}
