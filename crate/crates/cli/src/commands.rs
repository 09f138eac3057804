use std::f64::consts::PI;

use polcorr::experiment::{
    run_sweep_expectation, run_sweep_stochastic, Polarization, SweepResult, SweepSpec,
};
use polcorr::optics::trajectory_path;
use polcorr::quantum::{werner_coincidence_at_angle, WernerParameter};
use polcorr::semiclassical::{
    coincidence_closed_anti, p_total, visibility_bound_surface, visibility_symmetric,
};
use polcorr::{DetectorModel, SeedStream};
use serde::Serialize;

use crate::args::RunMode;
use crate::config::*;
use crate::output::{Cell, Table};
use crate::CliError;

fn require(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Usage(msg.to_string()))
    }
}

/// `n` points from `a` to `b`, both included.
fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |k| {
        if k + 1 == n && n > 1 {
            b
        } else {
            a + step * k as f64
        }
    })
}

/// Singlet curve next to the anticorrelated classical pairs, each classical
/// column divided by its polarizer-free coincidence probability.
pub fn figure1(p: &Figure1Params) -> Result<Table, CliError> {
    require(p.alpha_points >= 2, "--alpha-points must be at least 2")?;
    require(!p.s_values.is_empty(), "--s-values must not be empty")?;
    for &s in &p.s_values {
        require(
            s > 0.0 && s.is_finite(),
            "--s-values entries must be positive",
        )?;
    }
    let mut columns = vec!["alpha_rad".to_string(), "p_singlet_normalized".to_string()];
    columns.extend(p.s_values.iter().map(|s| format!("p_s{s}")));
    let mut table = Table::new(columns);
    let totals: Vec<f64> = p
        .s_values
        .iter()
        .map(|&s| p_total(s, s, DetectorModel::IDEAL))
        .collect::<Result<_, _>>()?;
    for alpha in linspace(0.0, PI, p.alpha_points) {
        let mut row: Vec<Cell> = vec![
            alpha.into(),
            werner_coincidence_at_angle(WernerParameter::SINGLET, alpha).into(),
        ];
        for (&s, &tot) in p.s_values.iter().zip(&totals) {
            row.push((coincidence_closed_anti(s, alpha)? / tot).into());
        }
        table.push(row);
    }
    Ok(table)
}

pub fn figure2(p: &Figure2Params) -> Result<Table, CliError> {
    require(p.points >= 2, "--points must be at least 2")?;
    require(
        p.s_min > 0.0 && p.s_max > p.s_min && p.s_max.is_finite(),
        "need 0 < --s-min < --s-max",
    )?;
    let mut table = Table::new(["s", "visibility"]);
    for (k, ls) in linspace(p.s_min.ln(), p.s_max.ln(), p.points).enumerate() {
        let s = match k {
            0 => p.s_min,
            k if k + 1 == p.points => p.s_max,
            _ => ls.exp(),
        };
        table.push(vec![s.into(), visibility_symmetric(s)?.into()]);
    }
    Ok(table)
}

pub fn figure3(p: &Figure3Params) -> Result<Table, CliError> {
    require(p.grid >= 2, "--grid must be at least 2")?;
    require(
        p.min > 0.0 && p.max > p.min && p.max.is_finite(),
        "need 0 < --min < --max",
    )?;
    let mut table = Table::new(["s_a", "s_b", "visibility_bound"]);
    for a in linspace(p.min, p.max, p.grid) {
        for b in linspace(p.min, p.max, p.grid) {
            table.push(vec![
                a.into(),
                b.into(),
                visibility_bound_surface(a, b)?.into(),
            ]);
        }
    }
    Ok(table)
}

pub fn figure4(p: &Figure4Params) -> Result<Table, CliError> {
    require(p.points >= 2, "--points must be at least 2")?;
    let period = p.depolarizer.period();
    let path = trajectory_path(&p.depolarizer, p.points)?;
    let mut table = Table::new(["t", "x", "y", "z"]);
    for (t, v) in linspace(0.0, period, p.points).zip(path) {
        table.push(vec![t.into(), v.x.into(), v.y.into(), v.z.into()]);
    }
    Ok(table)
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub setting: String,
    pub circle: &'static str,
    pub visibility: f64,
    pub visibility_error: f64,
    pub offset: f64,
    pub cos_amplitude: f64,
    pub sin_amplitude: f64,
    pub phase_rad: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub mode: &'static str,
    pub seed: Option<u64>,
    pub intensity_s: f64,
    pub pulses_per_setting: f64,
    pub fits: Vec<FitSummary>,
}

pub struct ExperimentOutput {
    pub table: Table,
    pub summary: ExperimentSummary,
}

pub fn experiment(run: &RunConfig, p: &ExperimentParams) -> Result<ExperimentOutput, CliError> {
    let stream = SeedStream::new(run.seed);
    let results: Vec<SweepResult> = Polarization::ALL
        .iter()
        .enumerate()
        .map(|(i, &pol)| {
            let sweep = SweepSpec::new(pol.bloch(), pol.circle(), p.step_deg)?;
            match run.mode {
                RunMode::Expectation => run_sweep_expectation(&p.config, &sweep),
                RunMode::Stochastic => {
                    run_sweep_stochastic(&p.config, &sweep, stream.derive(i as u64))
                }
            }
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new([
        "setting",
        "circle",
        "angle_deg",
        "coincidence",
        "single_a",
        "single_b",
    ]);
    let mut fits = Vec::new();
    for r in &results {
        for i in 0..r.angles_deg.len() {
            table.push(vec![
                r.setting.as_str().into(),
                r.circle.name().into(),
                r.angles_deg[i].into(),
                r.coincidences[i].into(),
                r.singles_a[i].into(),
                r.singles_b[i].into(),
            ]);
        }
        fits.push(FitSummary {
            setting: r.setting.clone(),
            circle: r.circle.name(),
            visibility: r.visibility,
            visibility_error: r.visibility_error,
            offset: r.fit.offset,
            cos_amplitude: r.fit.cos_amplitude,
            sin_amplitude: r.fit.sin_amplitude,
            phase_rad: r.fit.phase(),
            residual: r.fit.residual,
        });
    }
    let stochastic = run.mode == RunMode::Stochastic;
    Ok(ExperimentOutput {
        table,
        summary: ExperimentSummary {
            mode: if stochastic {
                "stochastic"
            } else {
                "expectation"
            },
            seed: stochastic.then_some(run.seed),
            intensity_s: p.config.intensity_s,
            pulses_per_setting: p.config.pulses_per_setting(),
            fits,
        },
    })
}
