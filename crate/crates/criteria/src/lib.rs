//! Acceptance criteria. Each check returns its verdict together with the
//! measured quantities and the tolerance it was held to.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use polcorr::experiment::{full_experiment, poisson_consistent, ExperimentConfig, Mode};
use polcorr::optics::{scan_input_angle, trajectory_moments, DepolarizerConfig, PlateOrder};
use polcorr::quantum::{
    is_separable, quantum_visibility, werner_coincidence, werner_coincidence_at_angle,
    WernerParameter,
};
use polcorr::semiclassical::*;
use polcorr::{haar_rotation, BlochVector, DetectorModel, SeedStream};
use rand::Rng;

pub const SEED: u64 = 20_231_016;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        let within = self.elapsed <= self.budget;
        format!(
            "[{}] {}. {} — {} ({:.1} s, budget {} s{})",
            if self.passed && within {
                "PASS"
            } else {
                "FAIL"
            },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            if within { "" } else { ", over budget" },
        )
    }

    pub fn ok(&self) -> bool {
        self.passed && self.elapsed <= self.budget
    }
}

fn timed(
    id: u32,
    title: &'static str,
    budget_secs: u64,
    f: impl FnOnce() -> polcorr::Result<(bool, String)>,
) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
    }
}

fn stream(id: u64) -> SeedStream {
    SeedStream::new(SEED).derive(id)
}

fn at_angle(alpha: f64) -> BlochVector {
    BlochVector::from_spherical(alpha, 0.0)
}

fn random_unit<R: Rng>(rng: &mut R) -> BlochVector {
    haar_rotation(rng).apply(BlochVector::Z)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn weak_limit_visibility() -> Outcome {
    timed(1, "weak-intensity visibility", 1, || {
        let v0 = visibility_symmetric(1e-6)?;
        let grid = log_grid(1e-3, 20.0, 50);
        let v = grid
            .iter()
            .map(|&s| visibility_symmetric(s))
            .collect::<polcorr::Result<Vec<_>>>()?;
        let bad = v.windows(2).filter(|w| w[1] >= w[0]).count();
        let err = (v0 - 1.0 / 3.0).abs();
        Ok((
            err <= 1e-4 && bad == 0,
            format!("|V(1e-6) − 1/3| = {err:.2e} (tol 1e-4); non-decreasing steps on 50-point grid [1e-3, 20]: {bad}"),
        ))
    })
}

pub fn closed_form_vs_monte_carlo() -> Outcome {
    timed(2, "closed form vs Monte Carlo", 60, || {
        let mut worst = 0.0_f64;
        let mut k = 0;
        for &s in &[0.0025, 1.0, 10.0] {
            for j in 0..13 {
                let alpha = PI * j as f64 / 12.0;
                let est = omega_averaged_coincidence(
                    &BeamPair::anti(s, BlochVector::Z),
                    BlochVector::Z,
                    at_angle(alpha),
                    DetectorModel::IDEAL,
                    AveragingMethod::MonteCarlo {
                        samples: 1_000_000,
                        stream: stream(200 + k),
                    },
                )?;
                k += 1;
                let closed = coincidence_closed_anti(s, alpha)?;
                worst = worst.max((est.value - closed).abs() / est.std_error);
            }
        }
        Ok((
            worst <= 3.0,
            format!("39 points, 10⁶ samples each; max |MC − closed| = {worst:.2} σ (tol 3 σ)"),
        ))
    })
}

pub fn bound_sandwich() -> Outcome {
    timed(3, "kernel bound sandwich and tightness", 300, || {
        let mut rng = stream(300).rng();
        let mut excess = f64::NEG_INFINITY;
        for i in 0..10_000u64 {
            let a = rng.gen_range(0.01..=10.0);
            let b = rng.gen_range(0.01..=10.0);
            let pair = BeamPair::new(
                random_unit(&mut rng).scale(a),
                random_unit(&mut rng).scale(b),
            );
            let (u_a, u_b) = (random_unit(&mut rng), random_unit(&mut rng));
            let est = u_kernel_mc(&pair, u_a, u_b, 20_000, stream(301).derive(i))?;
            let lo = (u_lower_bound(a, b)? - est.value) / est.std_error;
            let hi = (est.value - u_upper_bound(a, b)?) / est.std_error;
            excess = excess.max(lo).max(hi);
        }

        // Tightness: anti-parallel equal intensities, u_b swept over a half circle.
        let mut tight = 0.0_f64;
        for (n, &s) in [0.5, 1.0, 3.0].iter().enumerate() {
            let pair = BeamPair::anti(s, BlochVector::X);
            let ests = (0..13)
                .map(|j| {
                    u_kernel_mc(
                        &pair,
                        BlochVector::Z,
                        at_angle(PI * j as f64 / 12.0),
                        1_000_000,
                        stream(310 + n as u64).derive(j),
                    )
                })
                .collect::<polcorr::Result<Vec<_>>>()?;
            let min = ests
                .iter()
                .min_by(|x, y| x.value.total_cmp(&y.value))
                .unwrap();
            let max = ests
                .iter()
                .max_by(|x, y| x.value.total_cmp(&y.value))
                .unwrap();
            let z = |e: &Estimate, t: f64| {
                if e.std_error > 0.0 {
                    (e.value - t).abs() / e.std_error
                } else if e.value == t {
                    0.0
                } else {
                    f64::INFINITY
                }
            };
            tight = tight
                .max(z(min, u_lower_bound(s, s)?))
                .max(z(max, u_upper_bound(s, s)?));
        }
        Ok((
            excess <= 3.0 && tight <= 3.0,
            format!(
                "10⁴ random inputs: max (bound violation)/σ = {excess:.2} (tol 3; negative = strictly inside); \
                 extremes over u vs bounds at |s| ∈ {{0.5, 1, 3}}: {tight:.2} σ (tol 3 σ)"
            ),
        ))
    })
}

pub fn bound_surface() -> Outcome {
    timed(4, "visibility bound surface", 60, || {
        let axis: Vec<f64> = (0..40).map(|k| 0.1 + 9.9 * k as f64 / 39.0).collect();
        let mut inner = f64::NEG_INFINITY;
        for &a in axis.iter().filter(|&&a| a >= 0.5) {
            for &b in axis.iter().filter(|&&b| b >= 0.5) {
                inner = inner.max(visibility_bound_surface(a, b)?);
            }
        }
        let mut strip = f64::NEG_INFINITY;
        for &small in &[0.001, 0.01, 0.05] {
            for &b in &axis {
                strip = strip
                    .max(visibility_bound_surface(small, b)?)
                    .max(visibility_bound_surface(b, small)?);
            }
        }
        Ok((
            inner <= 1.0 / 3.0 + 1e-6 && strip > 1.0 / 3.0,
            format!(
                "max on 40×40 grid over [0.1, 10]² with both ≥ 0.5: {inner:.6} (tol 1/3 + 1e-6); \
                 max in strip min(|s_a|, |s_b|) ≤ 0.05: {strip:.4} (must exceed 1/3)"
            ),
        ))
    })
}

pub fn quantum_reference() -> Outcome {
    timed(5, "quantum reference", 1, || {
        let mut formula = 0.0_f64;
        let mut rng = stream(500).rng();
        for i in 0..=40 {
            let eta = WernerParameter::new(-1.0 + (4.0 / 3.0) * i as f64 / 40.0)?;
            for j in 0..=24 {
                let alpha = PI * j as f64 / 24.0;
                let exact = 0.25 * (1.0 + eta.eta() * alpha.cos());
                formula = formula.max((werner_coincidence_at_angle(eta, alpha) - exact).abs());
                let (u_a, u_b) = (random_unit(&mut rng), random_unit(&mut rng));
                let via_vectors = 0.25 * (1.0 + eta.eta() * u_a.dot(u_b));
                formula = formula.max((werner_coincidence(eta, u_a, u_b)? - via_vectors).abs());
            }
        }
        let singlet = quantum_visibility(WernerParameter::SINGLET);
        let mut misclassified = 0;
        for i in 0..=400 {
            let eta = -1.0 + (4.0 / 3.0) * i as f64 / 400.0;
            if is_separable(WernerParameter::new(eta)?) != (eta.abs() <= 1.0 / 3.0) {
                misclassified += 1;
            }
        }
        if !is_separable(WernerParameter::new(-1.0 / 3.0)?) {
            misclassified += 1;
        }
        Ok((
            formula == 0.0 && singlet == 1.0 && misclassified == 0,
            format!(
                "max |p − ¼(1 + η cos α)| = {formula:.1e}; singlet visibility = {singlet}; \
                 separability misclassified on 402 η values: {misclassified}"
            ),
        ))
    })
}

pub fn depolarizer_isotropy() -> Outcome {
    timed(6, "depolarizer isotropy", 10, || {
        let samples = 16_384;
        let mut parts = Vec::new();
        let mut all_ok = true;
        for order in [PlateOrder::HalfWaveFirst, PlateOrder::MagicFirst] {
            let name = match order {
                PlateOrder::HalfWaveFirst => "π plate first",
                PlateOrder::MagicFirst => "arccos(1/√3) plate first",
            };
            let base = DepolarizerConfig::nominal(order, 1.0)?;
            match scan_input_angle(&base, 8, samples, 1e-6)? {
                Some((cfg, _)) => {
                    let mut worst = (0.0_f64, 0.0_f64);
                    for &s in &[2.5e-3, 1.0, 10.0] {
                        let (m, q) = trajectory_moments(&cfg, s, samples)?.isotropy_errors(s);
                        worst = (worst.0.max(m / s), worst.1.max(q / (s * s)));
                    }
                    all_ok &= worst.0 <= 1e-6 && worst.1 <= 1e-6;
                    parts.push(format!(
                        "{name}: accepted input angle χ = {:.4} rad, |⟨s⟩|/|s| = {:.1e}, \
                         ‖⟨ssᵀ⟩ − |s|²I/3‖/|s|² = {:.1e}",
                        cfg.input_angle(),
                        worst.0,
                        worst.1
                    ));
                }
                None => {
                    all_ok = false;
                    parts.push(format!("{name}: no isotropic input angle"));
                }
            }
        }
        let default = ExperimentConfig::default().depolarizer;
        parts.push(format!(
            "experiment uses π plate first, χ = {:.4} rad; {samples} time samples, tol 1e-6",
            default.input_angle()
        ));
        Ok((all_ok, parts.join("; ")))
    })
}

pub fn virtual_experiment() -> Outcome {
    timed(7, "virtual experiment", 300, || {
        let cfg = ExperimentConfig::default();
        let expected = full_experiment(&cfg, Mode::Expectation, None)?;
        let vis: Vec<String> = expected
            .iter()
            .map(|r| format!("{} {:.4}", r.setting, r.visibility))
            .collect();
        let in_range = expected
            .iter()
            .all(|r| (0.323..=0.343).contains(&r.visibility));

        let simulated = full_experiment(&cfg, Mode::Stochastic, Some(stream(700)))?;
        let n = cfg.simulated_pulses() as f64;
        let (mut points, mut outside) = (0, 0);
        for (e, s) in expected.iter().zip(&simulated) {
            for (p, raw) in e
                .coincidence_probabilities()
                .iter()
                .zip(s.raw_coincidences())
            {
                points += 1;
                if !poisson_consistent(raw as u64, p * n, 3.0) {
                    outside += 1;
                }
            }
        }
        Ok((
            in_range && outside == 0,
            format!(
                "expectation visibilities [{}] (range [0.323, 0.343]); stochastic ({n:.0} pulses/setting): \
                 {outside}/{points} points outside 3 σ",
                vis.join(", ")
            ),
        ))
    })
}

pub fn expansion_consistency() -> Outcome {
    timed(8, "small-|s_a| expansion", 120, || {
        let s_a = BlochVector::Z.scale(1e-3);
        let s_b = -BlochVector::Z;
        let mut worst = 0.0_f64;
        for (j, &alpha) in [0.0, PI / 2.0, PI].iter().enumerate() {
            let u_b = at_angle(alpha);
            let approx = small_sa_coincidence(s_a, s_b, BlochVector::Z, u_b)?;
            let mc = omega_averaged_coincidence(
                &BeamPair::new(s_a, s_b),
                BlochVector::Z,
                u_b,
                DetectorModel::IDEAL,
                AveragingMethod::MonteCarlo {
                    samples: 10_000_000,
                    stream: stream(800 + j as u64),
                },
            )?;
            worst = worst.max(((approx - mc.value) / mc.value).abs());
        }
        let limit = small_sa_visibility(1e-9, 1.0)?;
        let limit_err = (limit - 1.0 / 3.0).abs();
        let joint = small_sa_visibility(1e-12, 1e-6)?;
        Ok((
            worst < 1e-2 && limit_err <= 1e-3,
            format!(
                "max relative deviation from MC (10⁷ samples) at (1e-3, 1): {worst:.2e} (tol 1e-2); \
                 visibility as |s_a| → 0 at |s_b| = 1: {limit:.6}, |V − 1/3| = {limit_err:.4} (tol 1e-3); \
                 at |s_b| = 1e-6 instead: {joint:.6}"
            ),
        ))
    })
}

pub fn all() -> Vec<fn() -> Outcome> {
    vec![
        weak_limit_visibility,
        closed_form_vs_monte_carlo,
        bound_sandwich,
        bound_surface,
        quantum_reference,
        depolarizer_isotropy,
        virtual_experiment,
        expansion_consistency,
    ]
}
