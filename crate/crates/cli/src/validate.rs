//! Invariant checks behind `polcorr validate`.
//!
//! Every check reports the measured value next to its tolerance. Random
//! streams are derived from the run seed, so a report is a pure function of
//! (seed, samples, nodes).

use std::f64::consts::PI;
use std::fmt::Write as _;

use polcorr::experiment::{fit_sinusoid, full_experiment, Mode, SweepSpec};
use polcorr::optics::{
    depolarizer_at, isotropy_check, scan_input_angle, trajectory_path, DepolarizerConfig,
    PlateOrder,
};
use polcorr::quadrature::HaarQuadrature;
use polcorr::quantum::{is_separable, quantum_visibility, werner_coincidence, WernerParameter};
use polcorr::rng::chunked_mean;
use polcorr::semiclassical::*;
use polcorr::{
    click_probability, haar_rotation, BlochVector, DetectorModel, Rotation3, SeedStream,
};
use rand::Rng;

use crate::args::Suite;
use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    /// Upper limit on `measured`.
    pub tolerance: f64,
}

impl Check {
    fn new(suite: &'static str, name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{status} {}.{} measured={:.6e} tolerance={:.3e}",
                c.suite, c.name, c.measured, c.tolerance
            )
            .unwrap();
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        writeln!(out, "{} checks, {} failed", self.checks.len(), failed).unwrap();
        out
    }
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<Report, CliError> {
    let root = SeedStream::new(cfg.seed);
    let mut checks = Vec::new();
    let wants = |s: Suite| suite == Suite::All || suite == s;
    if wants(Suite::Core) {
        checks.extend(core(cfg.mc_samples, root.derive(0))?);
    }
    if wants(Suite::Quantum) {
        checks.extend(quantum(root.derive(1))?);
    }
    if wants(Suite::Semiclassical) {
        checks.extend(semiclassical(cfg, root.derive(2))?);
    }
    if wants(Suite::Optics) {
        checks.extend(optics()?);
    }
    if wants(Suite::Experiment) {
        checks.extend(experiment()?);
    }
    Ok(Report { checks })
}

fn random_unit<R: Rng>(rng: &mut R) -> BlochVector {
    haar_rotation(rng).apply(BlochVector::Z)
}

/// Largest |z| over z-scores, used so a check reads "≤ 3 standard errors".
fn worst_sigma(pairs: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    pairs
        .map(|(est, se, target)| {
            if se > 0.0 {
                (est - target).abs() / se
            } else if est == target {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

fn core(samples: usize, stream: SeedStream) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let mut rng = stream.derive(0).rng();
    let mut worst = 0.0_f64;
    let mut acc = Rotation3::identity();
    for _ in 0..10_000 {
        let r = haar_rotation(&mut rng);
        let (o, d) = r.invariant_errors();
        acc = acc * r;
        let (co, cd) = acc.invariant_errors();
        worst = worst.max(o).max(d).max(co).max(cd);
    }
    out.push(Check::new(
        "core",
        "rotation_invariants_under_composition",
        worst,
        1e-10,
    ));

    // Haar isotropy: entrywise tolerance 5e-3 at 10⁶ samples, scaled for fewer.
    let tol = 5e-3 * (1e6 / samples as f64).sqrt().max(1.0);
    let e = BlochVector::new(0.6, 0.0, 0.8);
    let mut mean_err = 0.0_f64;
    let mut second_err = 0.0_f64;
    for i in 0..3 {
        let m = chunked_mean(stream.derive(1 + i as u64), samples, |rng| {
            haar_rotation(rng).apply(e).to_array()[i]
        });
        mean_err = mean_err.max(m.mean().abs());
        for j in 0..3 {
            let m = chunked_mean(
                stream.derive(10 + 3 * i as u64 + j as u64),
                samples,
                |rng| {
                    let v = haar_rotation(rng).apply(e).to_array();
                    v[i] * v[j]
                },
            );
            let target = if i == j { 1.0 / 3.0 } else { 0.0 };
            second_err = second_err.max((m.mean() - target).abs());
        }
    }
    out.push(Check::new("core", "haar_mean", mean_err, tol));
    out.push(Check::new("core", "haar_second_moment", second_err, tol));

    let p1 = click_probability(1.0, DetectorModel::IDEAL)?;
    out.push(Check::new(
        "core",
        "click_probability_at_one",
        (p1 - (1.0 - (-1.0f64).exp())).abs(),
        1e-15,
    ));
    out.push(Check::new(
        "core",
        "click_saturation",
        1.0 - click_probability(50.0, DetectorModel::IDEAL)?,
        1e-12,
    ));
    Ok(out)
}

fn quantum(stream: SeedStream) -> Result<Vec<Check>, CliError> {
    let mut rng = stream.rng();
    let mut worst = 0.0_f64;
    let mut formula = 0.0_f64;
    for k in 0..1000 {
        let eta = WernerParameter::new(-1.0 + (4.0 / 3.0) * k as f64 / 999.0)?;
        let (u_a, u_b) = (random_unit(&mut rng), random_unit(&mut rng));
        let r = haar_rotation(&mut rng);
        let p = werner_coincidence(eta, u_a, u_b)?;
        let q = werner_coincidence(eta, r.apply(u_a), r.apply(u_b))?;
        worst = worst.max((p - q).abs());
        formula = formula.max((p - 0.25 * (1.0 + eta.eta() * u_a.dot(u_b))).abs());
    }
    let sep_errors = [
        (-1.0, false),
        (-1.0 / 3.0, true),
        (0.0, true),
        (1.0 / 3.0, true),
        (-0.34, false),
    ]
    .iter()
    .filter(|&&(eta, sep)| is_separable(WernerParameter::new(eta).unwrap()) != sep)
    .count();
    Ok(vec![
        Check::new("quantum", "werner_formula", formula, 1e-15),
        Check::new("quantum", "rotation_invariance", worst, 1e-12),
        Check::new(
            "quantum",
            "singlet_visibility",
            (quantum_visibility(WernerParameter::SINGLET) - 1.0).abs(),
            0.0,
        ),
        Check::new(
            "quantum",
            "separability_classification_errors",
            sep_errors as f64,
            0.0,
        ),
    ])
}

fn semiclassical(cfg: &RunConfig, stream: SeedStream) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let rule = HaarQuadrature::new(cfg.quadrature_nodes)?;

    // closed form against direct sampling at s = 1
    let mut z = Vec::new();
    for k in 0..=6 {
        let alpha = PI * k as f64 / 6.0;
        let est = omega_averaged_coincidence(
            &BeamPair::anti(1.0, BlochVector::Z),
            BlochVector::Z,
            BlochVector::from_spherical(alpha, 0.0),
            DetectorModel::IDEAL,
            AveragingMethod::MonteCarlo {
                samples: cfg.mc_samples,
                stream: stream.derive(k),
            },
        )?;
        z.push((
            est.value,
            est.std_error,
            coincidence_closed_anti(1.0, alpha)?,
        ));
    }
    out.push(Check::new(
        "semiclassical",
        "closed_form_vs_mc_sigma",
        worst_sigma(z.into_iter()),
        3.0,
    ));

    // quadrature against the closed form
    let mut quad_err = 0.0_f64;
    for &s in &[0.0025, 1.0, 10.0] {
        for k in 0..=6 {
            let alpha = PI * k as f64 / 6.0;
            let u = u_kernel_quadrature(
                &BeamPair::anti(s, BlochVector::X),
                BlochVector::Z,
                BlochVector::from_spherical(alpha, 0.0),
                &rule,
            )?;
            let closed = coincidence_closed_anti(s, alpha)?;
            quad_err = quad_err.max((coincidence_from_kernel(s, s, u) - closed).abs());
        }
    }
    out.push(Check::new(
        "semiclassical",
        "quadrature_vs_closed_form",
        quad_err,
        1e-10,
    ));

    let mut mirror = 0.0_f64;
    for k in 0..=12 {
        let alpha = PI * k as f64 / 12.0;
        for &s in &[0.0025, 1.0, 10.0] {
            mirror = mirror.max(
                (coincidence_closed_parallel(s, alpha)? - coincidence_closed_anti(s, PI - alpha)?)
                    .abs(),
            );
        }
    }
    out.push(Check::new(
        "semiclassical",
        "parallel_anti_mirror",
        mirror,
        1e-12,
    ));

    // bound sandwich on random inputs; 1% of the sample budget per input
    let mut rng = stream.derive(100).rng();
    let per_input = (cfg.mc_samples / 100).max(100);
    let mut sandwich = 0.0_f64;
    for i in 0..200 {
        let a = rng.gen_range(0.01..10.0);
        let b = rng.gen_range(0.01..10.0);
        let pair = BeamPair::new(
            random_unit(&mut rng).scale(a),
            random_unit(&mut rng).scale(b),
        );
        let (u_a, u_b) = (random_unit(&mut rng), random_unit(&mut rng));
        let est = u_kernel_mc(&pair, u_a, u_b, per_input, stream.derive(1000 + i))?;
        let lo = (u_lower_bound(a, b)? - est.value) / est.std_error;
        let hi = (est.value - u_upper_bound(a, b)?) / est.std_error;
        sandwich = sandwich.max(lo).max(hi);
    }
    out.push(Check::new(
        "semiclassical",
        "bound_sandwich_excess_sigma",
        sandwich,
        3.0,
    ));

    let mut ordered = 0.0_f64;
    for a in (0..50).map(|k| 10.0 * k as f64 / 49.0) {
        for b in (0..50).map(|k| 10.0 * k as f64 / 49.0) {
            ordered = ordered.max(u_lower_bound(a, b)? - u_upper_bound(a, b)?);
        }
    }
    out.push(Check::new(
        "semiclassical",
        "lower_minus_upper_bound",
        ordered,
        0.0,
    ));

    let grid: Vec<f64> = (0..50)
        .map(|k| (1e-3f64.ln() + (20f64.ln() - 1e-3f64.ln()) * k as f64 / 49.0).exp())
        .collect();
    let vis = grid
        .iter()
        .map(|&s| visibility_symmetric(s))
        .collect::<polcorr::Result<Vec<_>>>()?;
    let non_decreasing = vis.windows(2).filter(|w| w[1] >= w[0]).count();
    out.push(Check::new(
        "semiclassical",
        "visibility_non_decreasing_steps",
        non_decreasing as f64,
        0.0,
    ));
    out.push(Check::new(
        "semiclassical",
        "visibility_weak_limit",
        (visibility_symmetric(1e-6)? - 1.0 / 3.0).abs(),
        1e-4,
    ));

    let mut surface = f64::NEG_INFINITY;
    for a in (0..40)
        .map(|k| 0.1 + 9.9 * k as f64 / 39.0)
        .filter(|&a| a >= 0.5)
    {
        for b in (0..40)
            .map(|k| 0.1 + 9.9 * k as f64 / 39.0)
            .filter(|&b| b >= 0.5)
        {
            surface = surface.max(visibility_bound_surface(a, b)?);
        }
    }
    out.push(Check::new(
        "semiclassical",
        "bound_surface_max_away_from_axes",
        surface,
        1.0 / 3.0 + 1e-6,
    ));
    Ok(out)
}

fn optics() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for order in [PlateOrder::HalfWaveFirst, PlateOrder::MagicFirst] {
        let cfg = DepolarizerConfig::nominal(order, 1.0)?;
        let name = match order {
            PlateOrder::HalfWaveFirst => (
                "isotropy_half_wave_first_mean",
                "isotropy_half_wave_first_second",
            ),
            PlateOrder::MagicFirst => ("isotropy_magic_first_mean", "isotropy_magic_first_second"),
        };
        let check = isotropy_check(&cfg, 16_384, 1e-6)?;
        out.push(Check::new("optics", name.0, check.mean_error, 1e-6));
        out.push(Check::new(
            "optics",
            name.1,
            check.second_moment_error,
            1e-6,
        ));
    }
    let found = scan_input_angle(
        &DepolarizerConfig::nominal(PlateOrder::HalfWaveFirst, 1.0)?,
        8,
        16_384,
        1e-6,
    )?;
    out.push(Check::new(
        "optics",
        "accepted_input_angle_found",
        if found.is_some() { 0.0 } else { 1.0 },
        0.0,
    ));

    let cfg = DepolarizerConfig::nominal(PlateOrder::HalfWaveFirst, 1.3)?;
    let mut period = 0.0_f64;
    for k in 0..100 {
        let t = 0.037 * k as f64;
        period = period
            .max(depolarizer_at(&cfg, t)?.max_abs_diff(&depolarizer_at(&cfg, t + cfg.period())?));
    }
    out.push(Check::new("optics", "periodicity", period, 1e-12));
    let path = trajectory_path(&cfg, 1000)?;
    let norm = path
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::new("optics", "path_norm", norm, 1e-12));
    out.push(Check::new(
        "optics",
        "path_closed",
        path[0].max_abs_diff(path[path.len() - 1]),
        1e-9,
    ));
    Ok(out)
}

fn experiment() -> Result<Vec<Check>, CliError> {
    let cfg = polcorr::experiment::ExperimentConfig::default();
    let results = full_experiment(&cfg, Mode::Expectation, None)?;
    let mut out = Vec::new();
    let off = results
        .iter()
        .map(|r| (r.visibility - 0.333).abs())
        .fold(0.0, f64::max);
    out.push(Check::new(
        "experiment",
        "visibility_distance_from_0.333",
        off,
        0.01,
    ));
    let mut phase = 0.0_f64;
    for r in &results {
        let pol = polcorr::experiment::Polarization::ALL
            .iter()
            .find(|p| p.label() == r.setting)
            .unwrap();
        let target = SweepSpec::for_setting(*pol).anti_aligned_angle();
        phase = phase.max(((r.fit.phase() - target + PI).rem_euclid(2.0 * PI) - PI).abs());
    }
    out.push(Check::new(
        "experiment",
        "fit_phase_at_anti_aligned_rad",
        phase,
        1e-7,
    ));

    let angles: Vec<f64> = (0..18).map(|k| (20.0 * k as f64).to_radians()).collect();
    let values: Vec<f64> = angles
        .iter()
        .map(|a| 3.0 + 0.7 * a.cos() - 0.4 * a.sin())
        .collect();
    let fit = fit_sinusoid(&angles, &values)?;
    let err = (fit.offset - 3.0)
        .abs()
        .max((fit.cos_amplitude - 0.7).abs())
        .max((fit.sin_amplitude + 0.4).abs());
    out.push(Check::new(
        "experiment",
        "fit_recovers_exact_sinusoid",
        err,
        1e-12,
    ));
    Ok(out)
}
