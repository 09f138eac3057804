//! Configuration file and flag resolution.
//!
//! The file is TOML; every key is optional and mirrors a flag. Resolution
//! order is flag, then file, then built-in default.

use std::path::{Path, PathBuf};

use polcorr::detector::DetectorModel;
use polcorr::experiment::ExperimentConfig;
use polcorr::optics::{DepolarizerConfig, PlateOrder};
use serde::Deserialize;

use crate::args::*;
use crate::CliError;

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub nodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub mode: Option<RunMode>,
    #[serde(default)]
    pub figure1: Figure1File,
    #[serde(default)]
    pub figure2: Figure2File,
    #[serde(default)]
    pub figure3: Figure3File,
    #[serde(default)]
    pub figure4: DepolarizerFile,
    #[serde(default)]
    pub experiment: ExperimentFile,
    #[serde(default)]
    pub validate: ValidateFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1File {
    pub s_values: Option<Vec<f64>>,
    pub alpha_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure2File {
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure3File {
    pub grid: Option<usize>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepolarizerFile {
    pub points: Option<usize>,
    pub plate_order: Option<PlateOrderArg>,
    pub input_angle: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub rep_rate: Option<f64>,
    pub duration: Option<f64>,
    pub intensity: Option<f64>,
    pub efficiency: Option<f64>,
    pub rotations: Option<u32>,
    pub subsample: Option<u64>,
    pub time_samples: Option<usize>,
    pub step_deg: Option<f64>,
    pub plate_order: Option<PlateOrderArg>,
    pub input_angle: Option<f64>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateFile {
    pub suite: Option<Suite>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// Settings shared by every subcommand after merging flags and file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub mc_samples: usize,
    pub quadrature_nodes: usize,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub mode: RunMode,
}

impl RunConfig {
    pub fn resolve(flags: &GlobalArgs, file: &FileConfig) -> Result<Self, CliError> {
        let cfg = Self {
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            mc_samples: flags
                .samples
                .or(file.samples)
                .unwrap_or(polcorr::semiclassical::DEFAULT_MC_SAMPLES),
            quadrature_nodes: flags
                .nodes
                .or(file.nodes)
                .unwrap_or(polcorr::quadrature::HaarQuadrature::DEFAULT_NODES),
            output_path: flags.out.clone().or_else(|| file.out.clone()),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            mode: flags.mode.or(file.mode).unwrap_or(RunMode::Expectation),
        };
        if cfg.mc_samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if cfg.quadrature_nodes == 0 {
            return Err(CliError::Usage("--nodes must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Params {
    pub s_values: Vec<f64>,
    pub alpha_points: usize,
}

impl Figure1Params {
    pub fn resolve(flags: &Figure1Args, file: &Figure1File) -> Self {
        Self {
            s_values: flags
                .s_values
                .clone()
                .or_else(|| file.s_values.clone())
                .unwrap_or(vec![0.0025, 1.0, 10.0]),
            alpha_points: flags.alpha_points.or(file.alpha_points).unwrap_or(181),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Params {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Figure2Params {
    pub fn resolve(flags: &Figure2Args, file: &Figure2File) -> Self {
        Self {
            s_min: flags.s_min.or(file.s_min).unwrap_or(1e-3),
            s_max: flags.s_max.or(file.s_max).unwrap_or(20.0),
            points: flags.points.or(file.points).unwrap_or(200),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Params {
    pub grid: usize,
    pub min: f64,
    pub max: f64,
}

impl Figure3Params {
    pub fn resolve(flags: &Figure3Args, file: &Figure3File) -> Self {
        Self {
            grid: flags.grid.or(file.grid).unwrap_or(40),
            min: flags.min.or(file.min).unwrap_or(0.1),
            max: flags.max.or(file.max).unwrap_or(10.0),
        }
    }
}

fn plate_order(arg: Option<PlateOrderArg>) -> PlateOrder {
    match arg.unwrap_or(PlateOrderArg::HalfWaveFirst) {
        PlateOrderArg::HalfWaveFirst => PlateOrder::HalfWaveFirst,
        PlateOrderArg::MagicFirst => PlateOrder::MagicFirst,
    }
}

fn depolarizer(
    order: Option<PlateOrderArg>,
    input_angle: Option<f64>,
    omega: f64,
) -> Result<DepolarizerConfig, CliError> {
    let cfg = DepolarizerConfig::nominal(plate_order(order), omega)?;
    Ok(match input_angle {
        Some(chi) if !chi.is_finite() => {
            return Err(CliError::Usage("--input-angle must be finite".into()))
        }
        Some(chi) => cfg.with_input_angle(chi),
        None => cfg,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure4Params {
    pub points: usize,
    pub depolarizer: DepolarizerConfig,
}

impl Figure4Params {
    pub fn resolve(flags: &DepolarizerArgs, file: &DepolarizerFile) -> Result<Self, CliError> {
        Ok(Self {
            points: flags.points.or(file.points).unwrap_or(2001),
            // unit angular velocity: time runs over [0, π]
            depolarizer: depolarizer(
                flags.plate_order.or(file.plate_order),
                flags.input_angle.or(file.input_angle),
                1.0,
            )?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub config: ExperimentConfig,
    pub step_deg: f64,
    pub summary: Option<PathBuf>,
}

impl ExperimentParams {
    pub fn resolve(flags: &ExperimentArgs, file: &ExperimentFile) -> Result<Self, CliError> {
        let d = ExperimentConfig::default();
        let detector = match flags.efficiency.or(file.efficiency) {
            Some(e) => DetectorModel::new(e)?,
            None => d.detector,
        };
        let config = ExperimentConfig {
            rep_rate: flags.rep_rate.or(file.rep_rate).unwrap_or(d.rep_rate),
            duration_per_setting: flags
                .duration
                .or(file.duration)
                .unwrap_or(d.duration_per_setting),
            intensity_s: flags.intensity.or(file.intensity).unwrap_or(d.intensity_s),
            detector,
            depolarizer: depolarizer(
                flags.plate_order.or(file.plate_order),
                flags.input_angle.or(file.input_angle),
                d.depolarizer.angular_velocity,
            )?,
            rotations_per_point: flags
                .rotations
                .or(file.rotations)
                .unwrap_or(d.rotations_per_point),
            pulse_subsample: flags
                .subsample
                .or(file.subsample)
                .unwrap_or(d.pulse_subsample),
            time_samples: flags
                .time_samples
                .or(file.time_samples)
                .unwrap_or(d.time_samples),
        };
        config.validate()?;
        Ok(Self {
            config,
            step_deg: flags
                .step_deg
                .or(file.step_deg)
                .unwrap_or(polcorr::experiment::SweepSpec::DEFAULT_STEP_DEG),
            summary: flags.summary.clone().or_else(|| file.summary.clone()),
        })
    }
}

pub fn suite(flags: &ValidateArgs, file: &ValidateFile) -> Suite {
    flags.suite.or(file.suite).unwrap_or(Suite::All)
}
