//! Virtual photon-counting experiment on two collectively depolarized beams.
//!
//! Two orthogonally polarized beams of equal intensity pass the same
//! counter-rotating waveplate depolarizer. Beam a is analyzed along one of
//! six fixed polarizations while the analyzer of beam b sweeps a great
//! circle of the Bloch sphere. Coincidences are fitted with
//! `a₀ + a₁ cos φ + a₂ sin φ` and the visibility is `sqrt(a₁² + a₂²)/a₀`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::detector::{clicks, DetectorModel};
use crate::error::{config, Error, Result};
use crate::optics::{depolarizer_rotation, DepolarizerConfig, PlateOrder};
use crate::rng::{SeedStream, CHUNK_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Laser repetition rate, Hz.
    pub rep_rate: f64,
    /// Counting time per analyzer setting, s.
    pub duration_per_setting: f64,
    /// Mean photon number per pulse in each beam.
    pub intensity_s: f64,
    pub detector: DetectorModel,
    /// Plates and input polarization of beam a; beam b enters orthogonal.
    /// The plate rotation rate is set by `rotations_per_point`.
    pub depolarizer: DepolarizerConfig,
    /// Full plate revolutions completed during one setting.
    pub rotations_per_point: u32,
    /// Stochastic mode simulates every k-th pulse and scales counts by k.
    pub pulse_subsample: u64,
    /// Time samples per depolarizer period in expectation mode.
    pub time_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let rotations_per_point = 10;
        let duration_per_setting = 60.0;
        let omega = 2.0 * PI * rotations_per_point as f64 / duration_per_setting;
        Self {
            rep_rate: 8e7,
            duration_per_setting,
            intensity_s: 2.5e-3,
            detector: DetectorModel::IDEAL,
            depolarizer: DepolarizerConfig::nominal(PlateOrder::HalfWaveFirst, omega)
                .expect("nominal depolarizer is valid"),
            rotations_per_point,
            pulse_subsample: 4800,
            time_samples: 4096,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.rep_rate, "repetition rate")?;
        positive(self.duration_per_setting, "duration per setting")?;
        if !(self.intensity_s >= 0.0 && self.intensity_s.is_finite()) {
            return Err(config(format!(
                "intensity must be >= 0, got {}",
                self.intensity_s
            )));
        }
        if self.rotations_per_point == 0 {
            return Err(config("rotations per point must be positive"));
        }
        if self.pulse_subsample == 0 {
            return Err(config("pulse subsample must be at least 1"));
        }
        if self.time_samples == 0 {
            return Err(config("time samples must be at least 1"));
        }
        Ok(())
    }

    /// Pulses emitted during one setting.
    pub fn pulses_per_setting(&self) -> f64 {
        self.rep_rate * self.duration_per_setting
    }

    /// Pulses actually drawn in stochastic mode.
    pub fn simulated_pulses(&self) -> u64 {
        (self.pulses_per_setting() / self.pulse_subsample as f64).floor() as u64
    }

    /// Depolarizer turning fast enough to complete `rotations_per_point`
    /// revolutions per setting.
    pub fn schedule(&self) -> Result<DepolarizerConfig> {
        let omega = 2.0 * PI * self.rotations_per_point as f64 / self.duration_per_setting;
        self.depolarizer.with_angular_velocity(omega)
    }
}

/// Great circles scanned by the analyzer of beam b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreatCircle {
    Xz,
    Yz,
    Xy,
}

impl GreatCircle {
    /// Orthonormal basis `(p, q)`; the circle is `cos φ p + sin φ q`.
    /// Each circle starts (φ = 0) at the pole of the settings it is paired
    /// with: H, R and D respectively.
    pub fn basis(self) -> (BlochVector, BlochVector) {
        match self {
            GreatCircle::Xz => (BlochVector::Z, BlochVector::X),
            GreatCircle::Yz => (BlochVector::Y, BlochVector::Z),
            GreatCircle::Xy => (BlochVector::X, BlochVector::Y),
        }
    }

    pub fn point(self, phi: f64) -> BlochVector {
        let (p, q) = self.basis();
        let (s, c) = phi.sin_cos();
        p.scale(c) + q.scale(s)
    }

    pub fn name(self) -> &'static str {
        match self {
            GreatCircle::Xz => "xz",
            GreatCircle::Yz => "yz",
            GreatCircle::Xy => "xy",
        }
    }
}

/// The six analyzer settings of beam a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    Horizontal,
    Vertical,
    Diagonal,
    Antidiagonal,
    RightCircular,
    LeftCircular,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::Horizontal,
        Polarization::Vertical,
        Polarization::RightCircular,
        Polarization::LeftCircular,
        Polarization::Diagonal,
        Polarization::Antidiagonal,
    ];

    pub fn bloch(self) -> BlochVector {
        match self {
            Polarization::Horizontal => BlochVector::Z,
            Polarization::Vertical => -BlochVector::Z,
            Polarization::Diagonal => BlochVector::X,
            Polarization::Antidiagonal => -BlochVector::X,
            Polarization::RightCircular => BlochVector::Y,
            Polarization::LeftCircular => -BlochVector::Y,
        }
    }

    /// Circle scanned against this setting: it passes through ±setting.
    pub fn circle(self) -> GreatCircle {
        match self {
            Polarization::Horizontal | Polarization::Vertical => GreatCircle::Xz,
            Polarization::RightCircular | Polarization::LeftCircular => GreatCircle::Yz,
            Polarization::Diagonal | Polarization::Antidiagonal => GreatCircle::Xy,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarization::Horizontal => "H",
            Polarization::Vertical => "V",
            Polarization::Diagonal => "D",
            Polarization::Antidiagonal => "A",
            Polarization::RightCircular => "R",
            Polarization::LeftCircular => "L",
        }
    }

    pub fn from_bloch(v: BlochVector) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.bloch().max_abs_diff(v) < 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub beam_a_setting: BlochVector,
    pub circle: GreatCircle,
    /// Step along the great circle, degrees. A polarizer turned by 10°
    /// moves the analyzer 20° on the sphere.
    pub step_deg: f64,
}

impl SweepSpec {
    pub const DEFAULT_STEP_DEG: f64 = 20.0;

    pub fn new(beam_a_setting: BlochVector, circle: GreatCircle, step_deg: f64) -> Result<Self> {
        let spec = Self {
            beam_a_setting,
            circle,
            step_deg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn for_setting(pol: Polarization) -> Self {
        Self {
            beam_a_setting: pol.bloch(),
            circle: pol.circle(),
            step_deg: Self::DEFAULT_STEP_DEG,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pol = Polarization::from_bloch(self.beam_a_setting)
            .ok_or_else(|| config("beam a setting must be one of ±x, ±y, ±z"))?;
        if pol.circle() != self.circle {
            return Err(config(format!(
                "setting {} must be scanned on the {} circle, not {}",
                pol.label(),
                pol.circle().name(),
                self.circle.name()
            )));
        }
        if !(self.step_deg > 0.0 && self.step_deg <= 90.0) {
            return Err(config(format!(
                "step must lie in (0°, 90°], got {}",
                self.step_deg
            )));
        }
        Ok(())
    }

    /// Great-circle angles in degrees, one full turn without the endpoint.
    pub fn angles_deg(&self) -> Vec<f64> {
        let n = (360.0 / self.step_deg - 1e-9).floor() as usize + 1;
        (0..n).map(|k| k as f64 * self.step_deg).collect()
    }

    /// Great-circle angle (rad) of the analyzer orthogonal to beam a's setting.
    pub fn anti_aligned_angle(&self) -> f64 {
        let (p, q) = self.circle.basis();
        let target = -self.beam_a_setting;
        target.dot(q).atan2(target.dot(p)).rem_euclid(2.0 * PI)
    }
}

/// Least-squares coefficients of `a₀ + a₁ cos φ + a₂ sin φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub cos_amplitude: f64,
    pub sin_amplitude: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Covariance of `(a₀, a₁, a₂)` for the supplied data variances.
    #[serde(skip)]
    covariance: Option<[[f64; 3]; 3]>,
}

impl SinusoidFit {
    pub fn amplitude(&self) -> f64 {
        self.cos_amplitude.hypot(self.sin_amplitude)
    }

    /// `amplitude / offset`, zero when the offset vanishes.
    pub fn visibility(&self) -> f64 {
        if self.offset == 0.0 {
            0.0
        } else {
            self.amplitude() / self.offset
        }
    }

    /// Angle of the fitted maximum, in [0, 2π).
    pub fn phase(&self) -> f64 {
        self.sin_amplitude
            .atan2(self.cos_amplitude)
            .rem_euclid(2.0 * PI)
    }

    /// Linearized error of the visibility.
    pub fn visibility_error(&self) -> f64 {
        let Some(c) = self.covariance else { return 0.0 };
        if self.offset == 0.0 {
            return 0.0;
        }
        let v = self.visibility();
        let amp = self.amplitude();
        let g = if amp > 0.0 {
            [
                -v / self.offset,
                self.cos_amplitude / (amp * self.offset),
                self.sin_amplitude / (amp * self.offset),
            ]
        } else {
            // Gradient of |a| is undefined at 0; use the isotropic spread.
            return (0.5 * (c[1][1] + c[2][2])).max(0.0).sqrt() / self.offset;
        };
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += g[i] * c[i][j] * g[j];
            }
        }
        var.max(0.0).sqrt()
    }

    pub fn evaluate(&self, phi: f64) -> f64 {
        self.offset + self.cos_amplitude * phi.cos() + self.sin_amplitude * phi.sin()
    }
}

/// Linear least-squares fit of `a₀ + a₁ cos φ + a₂ sin φ` (angles in rad).
pub fn fit_sinusoid(angles: &[f64], values: &[f64]) -> Result<SinusoidFit> {
    fit_sinusoid_weighted(angles, values, None)
}

/// As [`fit_sinusoid`], also propagating per-point `variances` into the
/// coefficient covariance.
pub fn fit_sinusoid_weighted(
    angles: &[f64],
    values: &[f64],
    variances: Option<&[f64]>,
) -> Result<SinusoidFit> {
    let n = angles.len();
    if n != values.len() || variances.is_some_and(|v| v.len() != n) {
        return Err(Error::Fit("angle and value lists differ in length".into()));
    }
    if n < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {n}")));
    }
    if angular_span(angles) < PI - 1e-12 {
        return Err(Error::Fit("angles must span at least half a period".into()));
    }
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => angles[i].cos(),
        _ => angles[i].sin(),
    });
    let normal: Matrix3<f64> = (design.transpose() * &design)
        .fixed_view::<3, 3>(0, 0)
        .into();
    let inverse = normal
        .try_inverse()
        .filter(|inv| {
            inv.iter().all(|v| v.is_finite())
                && normal.determinant().abs() > 1e-12 * (n as f64).powi(3)
        })
        .ok_or_else(|| Error::Fit("degenerate design matrix".into()))?;
    let y = DVector::from_column_slice(values);
    let xty = design.transpose() * &y;
    let coef = inverse * nalgebra::Vector3::new(xty[0], xty[1], xty[2]);
    let residual = {
        let pred = &design * DVector::from_column_slice(coef.as_slice());
        ((pred - &y).norm_squared() / n as f64).sqrt()
    };
    let covariance = variances.map(|var| {
        // A = (XᵀX)⁻¹Xᵀ, Cov = A diag(var) Aᵀ
        let a = DMatrix::from_column_slice(3, 3, inverse.as_slice()) * design.transpose();
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = (0..n).map(|k| a[(i, k)] * var[k] * a[(j, k)]).sum();
            }
        }
        c
    });
    Ok(SinusoidFit {
        offset: coef[0],
        cos_amplitude: coef[1],
        sin_amplitude: coef[2],
        residual,
        covariance,
    })
}

/// Smallest arc covering all angles, measured on the circle.
fn angular_span(angles: &[f64]) -> f64 {
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    a.sort_by(f64::total_cmp);
    a.dedup();
    if a.len() < 2 {
        return 0.0;
    }
    let mut largest_gap = a[0] + 2.0 * PI - a[a.len() - 1];
    for w in a.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    2.0 * PI - largest_gap
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Expectation,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub setting: String,
    pub circle: GreatCircle,
    pub angles_deg: Vec<f64>,
    /// Coincidence counts per setting (expected, or scaled simulated counts).
    pub coincidences: Vec<f64>,
    pub singles_a: Vec<f64>,
    pub singles_b: Vec<f64>,
    /// Pulses represented by each count.
    pub pulses: f64,
    /// Simulated counts are multiplied by this factor.
    pub count_scale: f64,
    pub fit: SinusoidFit,
    pub visibility: f64,
    pub visibility_error: f64,
}

impl SweepResult {
    pub fn coincidence_probabilities(&self) -> Vec<f64> {
        self.coincidences.iter().map(|c| c / self.pulses).collect()
    }

    /// Unscaled simulated coincidence counts.
    pub fn raw_coincidences(&self) -> Vec<f64> {
        self.coincidences
            .iter()
            .map(|c| c / self.count_scale)
            .collect()
    }

    fn assemble(
        sweep: &SweepSpec,
        points: Vec<[f64; 3]>,
        pulses: f64,
        count_scale: f64,
    ) -> Result<Self> {
        let angles_deg = sweep.angles_deg();
        let coincidences: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let variances: Vec<f64> = coincidences.iter().map(|c| count_scale * c).collect();
        let radians: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
        let fit = fit_sinusoid_weighted(&radians, &coincidences, Some(&variances))?;
        let setting = Polarization::from_bloch(sweep.beam_a_setting)
            .map(|p| p.label().to_string())
            .unwrap_or_default();
        Ok(Self {
            setting,
            circle: sweep.circle,
            angles_deg,
            singles_a: points.iter().map(|p| p[1]).collect(),
            singles_b: points.iter().map(|p| p[2]).collect(),
            coincidences,
            pulses,
            count_scale,
            visibility: fit.visibility(),
            visibility_error: fit.visibility_error(),
            fit,
        })
    }
}

struct Beams {
    schedule: DepolarizerConfig,
    s_a: BlochVector,
    s_b: BlochVector,
}

impl Beams {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let schedule = cfg.schedule()?;
        let s = cfg.detector.effective(cfg.intensity_s);
        let s_a = schedule.input_polarization.scale(s);
        Ok(Self {
            schedule,
            s_a,
            s_b: -s_a,
        })
    }

    /// Click probabilities `(p_a, p_b)` of a pulse emitted at time `t`.
    #[inline]
    fn click_probabilities(&self, t: f64, u_a: BlochVector, u_b: BlochVector) -> (f64, f64) {
        let r = depolarizer_rotation(&self.schedule, t);
        let a = r.apply(self.s_a);
        let b = r.apply(self.s_b);
        let s = self.s_a.norm();
        (
            clicks(0.5 * (s + u_a.dot(a)).max(0.0)),
            clicks(0.5 * (s + u_b.dot(b)).max(0.0)),
        )
    }
}

/// Per-pulse probabilities `[coincidence, single a, single b]` averaged over
/// one depolarizer period.
fn period_averaged(beams: &Beams, u_a: BlochVector, u_b: BlochVector, samples: usize) -> [f64; 3] {
    let dt = beams.schedule.period() / samples as f64;
    let mut acc = [0.0; 3];
    for k in 0..samples {
        let (pa, pb) = beams.click_probabilities(k as f64 * dt, u_a, u_b);
        acc[0] += pa * pb;
        acc[1] += pa;
        acc[2] += pb;
    }
    acc.map(|v| v / samples as f64)
}

/// Exact per-pulse probabilities `[coincidence, single a, single b]` at every
/// sweep angle.
pub fn sweep_probabilities(cfg: &ExperimentConfig, sweep: &SweepSpec) -> Result<Vec<[f64; 3]>> {
    cfg.validate()?;
    sweep.validate()?;
    let beams = Beams::new(cfg)?;
    Ok(sweep
        .angles_deg()
        .par_iter()
        .map(|deg| {
            period_averaged(
                &beams,
                sweep.beam_a_setting,
                sweep.circle.point(deg.to_radians()),
                cfg.time_samples,
            )
        })
        .collect())
}

/// Expected counts from exact per-pulse probabilities, no sampling noise.
pub fn run_sweep_expectation(cfg: &ExperimentConfig, sweep: &SweepSpec) -> Result<SweepResult> {
    let probs = sweep_probabilities(cfg, sweep)?;
    let pulses = cfg.pulses_per_setting();
    let counts = probs.into_iter().map(|p| p.map(|v| v * pulses)).collect();
    SweepResult::assemble(sweep, counts, pulses, 1.0)
}

/// Pulse-by-pulse Bernoulli simulation of both detectors.
///
/// Every `pulse_subsample`-th pulse is drawn at its true emission time and
/// counts are scaled back up. Each sweep point and each chunk of pulses uses
/// its own substream of `stream`.
pub fn run_sweep_stochastic(
    cfg: &ExperimentConfig,
    sweep: &SweepSpec,
    stream: SeedStream,
) -> Result<SweepResult> {
    cfg.validate()?;
    sweep.validate()?;
    let beams = Beams::new(cfg)?;
    let n = cfg.simulated_pulses();
    if n == 0 {
        return Err(config("pulse subsample leaves no pulses to simulate"));
    }
    let dt = cfg.pulse_subsample as f64 / cfg.rep_rate;
    let chunks = n.div_ceil(CHUNK_SIZE as u64);
    let counts: Vec<[f64; 3]> = sweep
        .angles_deg()
        .iter()
        .enumerate()
        .map(|(i, deg)| {
            let u_b = sweep.circle.point(deg.to_radians());
            let point_stream = stream.derive(i as u64);
            let per_chunk: Vec<[u64; 3]> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = point_stream.derive(c).rng();
                    let start = c * CHUNK_SIZE as u64;
                    let end = (start + CHUNK_SIZE as u64).min(n);
                    let mut k = [0u64; 3];
                    for j in start..end {
                        let (pa, pb) =
                            beams.click_probabilities(j as f64 * dt, sweep.beam_a_setting, u_b);
                        let a = rng.gen::<f64>() < pa;
                        let b = rng.gen::<f64>() < pb;
                        k[0] += (a && b) as u64;
                        k[1] += a as u64;
                        k[2] += b as u64;
                    }
                    k
                })
                .collect();
            let total = per_chunk.iter().fold([0u64; 3], |acc, k| {
                [acc[0] + k[0], acc[1] + k[1], acc[2] + k[2]]
            });
            total.map(|v| v as f64 * cfg.pulse_subsample as f64)
        })
        .collect();
    SweepResult::assemble(
        sweep,
        counts,
        n as f64 * cfg.pulse_subsample as f64,
        cfg.pulse_subsample as f64,
    )
}

/// All six settings in the order xz (H, V), yz (R, L), xy (D, A).
pub fn full_experiment(
    cfg: &ExperimentConfig,
    mode: Mode,
    stream: Option<SeedStream>,
) -> Result<Vec<SweepResult>> {
    Polarization::ALL
        .iter()
        .enumerate()
        .map(|(i, &pol)| {
            let sweep = SweepSpec::for_setting(pol);
            match mode {
                Mode::Expectation => run_sweep_expectation(cfg, &sweep),
                Mode::Stochastic => {
                    let s = stream.ok_or_else(|| config("stochastic mode needs a seed"))?;
                    run_sweep_stochastic(cfg, &sweep, s.derive(i as u64))
                }
            }
        })
        .collect()
}

/// Two-sided Poisson consistency: `observed` is accepted unless it lies in a
/// tail of the Poisson(`mean`) law with probability below that of a normal
/// variate beyond `z` standard deviations.
pub fn poisson_consistent(observed: u64, mean: f64, z: f64) -> bool {
    if mean <= 0.0 {
        return observed == 0;
    }
    let tail = 0.5 * erfc(z / std::f64::consts::SQRT_2);
    let (lower, upper) = poisson_tails(observed, mean);
    lower >= tail && upper >= tail
}

/// `(P(X ≤ k), P(X ≥ k))` for X ~ Poisson(mean), summed in log space.
fn poisson_tails(k: u64, mean: f64) -> (f64, f64) {
    let log_pmf = |j: u64| j as f64 * mean.ln() - mean - ln_factorial(j);
    let pk = log_pmf(k).exp();
    let mut below = 0.0;
    let mut j = k;
    let mut p = pk;
    loop {
        below += p;
        if j == 0 || p < below * 1e-17 && (j as f64) < mean {
            break;
        }
        p *= j as f64 / mean;
        j -= 1;
    }
    let mut above = 0.0;
    let mut j = k;
    let mut p = pk;
    loop {
        above += p;
        j += 1;
        p *= mean / j as f64;
        if p < above * 1e-17 && j as f64 > mean {
            break;
        }
    }
    (below.min(1.0), above.min(1.0))
}

fn ln_factorial(n: u64) -> f64 {
    if n < 20 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        // Stirling series for ln Γ(x)
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Complementary error function (Numerical Recipes erfcc, |ε| < 1.2e−7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98
                                    + t * (1.488_515_87
                                        + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiclassical::coincidence_closed_anti;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    #[test]
    fn exact_sinusoid_recovered() {
        let phi = grid(18);
        let y: Vec<f64> = phi.iter().map(|p| 0.5 * (1.0 + (p.cos()) / 3.0)).collect();
        let fit = fit_sinusoid(&phi, &y).unwrap();
        assert!((fit.offset - 0.5).abs() < 1e-14);
        assert!((fit.cos_amplitude - 1.0 / 6.0).abs() < 1e-14);
        assert!(fit.sin_amplitude.abs() < 1e-14);
        assert!(fit.residual < 1e-12);
        assert!((fit.visibility() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_sinusoid_phase() {
        let phi = grid(12);
        let y: Vec<f64> = phi.iter().map(|p| 3.0 + 0.7 * (p - 1.1).cos()).collect();
        let fit = fit_sinusoid(&phi, &y).unwrap();
        assert!((fit.phase() - 1.1).abs() < 1e-12);
        assert!((fit.amplitude() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn constant_data_has_no_visibility() {
        let phi = grid(9);
        let fit = fit_sinusoid(&phi, &[2.0; 9]).unwrap();
        assert!(fit.cos_amplitude.abs() < 1e-15 && fit.sin_amplitude.abs() < 1e-15);
        assert!(fit.visibility() < 1e-15);
    }

    #[test]
    fn strong_beams_are_not_harmonic() {
        let phi = grid(18);
        let alpha = |p: f64| p.cos().clamp(-1.0, 1.0).acos();
        let weak: Vec<f64> = phi
            .iter()
            .map(|&p| coincidence_closed_anti(0.0025, alpha(p)).unwrap())
            .collect();
        let strong: Vec<f64> = phi
            .iter()
            .map(|&p| coincidence_closed_anti(10.0, alpha(p)).unwrap())
            .collect();
        let rw = fit_sinusoid(&phi, &weak).unwrap();
        let rs = fit_sinusoid(&phi, &strong).unwrap();
        assert!(rs.residual / rs.offset > 1e-3, "{}", rs.residual);
        assert!(rw.residual / rw.offset < 1e-3);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_sinusoid(&[0.0, 1.0, 2.0], &[1.0; 3]),
            Err(Error::Fit(_))
        ));
        // Four points within a quarter turn.
        assert!(fit_sinusoid(&[0.0, 0.1, 0.2, 0.3], &[1.0; 4]).is_err());
        // Enough span but only two distinct angles: rank deficient.
        assert!(fit_sinusoid(&[0.0, PI, 0.0, PI], &[1.0, 2.0, 1.0, 2.0]).is_err());
        assert!(fit_sinusoid(&grid(6), &[1.0; 5]).is_err());
    }

    #[test]
    fn sweep_spec_pairing() {
        for pol in Polarization::ALL {
            assert!(SweepSpec::for_setting(pol).validate().is_ok());
        }
        assert!(matches!(
            SweepSpec::new(BlochVector::Z, GreatCircle::Xy, 20.0),
            Err(Error::Config(_))
        ));
        assert!(SweepSpec::new(BlochVector::Y, GreatCircle::Xz, 20.0).is_err());
        assert!(
            SweepSpec::new(BlochVector::from_spherical(1.0, 0.0), GreatCircle::Xz, 20.0).is_err()
        );
        assert!(SweepSpec::new(BlochVector::Z, GreatCircle::Xz, 0.0).is_err());
        let s = SweepSpec::for_setting(Polarization::Horizontal);
        assert_eq!(s.angles_deg().len(), 18);
        assert_eq!(s.angles_deg()[17], 340.0);
    }

    #[test]
    fn circles_contain_their_settings() {
        for pol in Polarization::ALL {
            let s = SweepSpec::for_setting(pol);
            let u = s.circle.point(s.anti_aligned_angle());
            assert!(u.max_abs_diff(-pol.bloch()) < 1e-12, "{pol:?}");
        }
    }

    fn fast_cfg() -> ExperimentConfig {
        ExperimentConfig {
            time_samples: 512,
            ..Default::default()
        }
    }

    #[test]
    fn expectation_visibility_near_third() {
        let cfg = fast_cfg();
        for pol in Polarization::ALL {
            let r = run_sweep_expectation(&cfg, &SweepSpec::for_setting(pol)).unwrap();
            assert!(
                (r.visibility - 1.0 / 3.0).abs() < 0.01,
                "{pol:?}: {}",
                r.visibility
            );
            assert!(r.visibility <= 1.0 / 3.0 + 0.005);
            let s = SweepSpec::for_setting(pol);
            let d = (r.fit.phase() - s.anti_aligned_angle()).rem_euclid(2.0 * PI);
            // Linear settings are exactly symmetric. For circular ones the
            // trajectory's higher moments tilt the phase by O(s²).
            let tol = match pol.circle() {
                GreatCircle::Yz => 1e-7,
                _ => 1e-9,
            };
            assert!(
                d.min(2.0 * PI - d) < tol,
                "{pol:?}: phase {}",
                r.fit.phase()
            );
            // Maximum of the data at the anti-aligned point, minimum at the aligned one.
            let k_max = (s.anti_aligned_angle().to_degrees() / s.step_deg).round() as usize % 18;
            let k_min = (k_max + 9) % 18;
            let max = r.coincidences.iter().cloned().fold(f64::MIN, f64::max);
            let min = r.coincidences.iter().cloned().fold(f64::MAX, f64::min);
            assert_eq!(r.coincidences[k_max], max);
            assert_eq!(r.coincidences[k_min], min);
        }
    }

    #[test]
    fn circular_phase_tilt_scales_with_intensity_squared() {
        let sweep = SweepSpec::for_setting(Polarization::RightCircular);
        let tilt = |s: f64| {
            let cfg = ExperimentConfig {
                intensity_s: s,
                ..fast_cfg()
            };
            let r = run_sweep_expectation(&cfg, &sweep).unwrap();
            let d = (r.fit.phase() - sweep.anti_aligned_angle()).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d)
        };
        let ratio = tilt(2.5e-3) / tilt(2.5e-4);
        assert!((ratio - 100.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn antipodal_setting_shifts_phase_by_pi() {
        let cfg = fast_cfg();
        for (p, q) in [
            (Polarization::Horizontal, Polarization::Vertical),
            (Polarization::Diagonal, Polarization::Antidiagonal),
            (Polarization::RightCircular, Polarization::LeftCircular),
        ] {
            let a = run_sweep_expectation(&cfg, &SweepSpec::for_setting(p)).unwrap();
            let b = run_sweep_expectation(&cfg, &SweepSpec::for_setting(q)).unwrap();
            let d = (b.fit.phase() - a.fit.phase() - PI).rem_euclid(2.0 * PI);
            let tol = if p.circle() == GreatCircle::Yz {
                3e-7
            } else {
                1e-9
            };
            assert!(d.min(2.0 * PI - d) < tol, "{p:?}/{q:?}: {d}");
        }
    }

    #[test]
    fn coincidences_bounded_by_singles() {
        let r = run_sweep_expectation(&fast_cfg(), &SweepSpec::for_setting(Polarization::Diagonal))
            .unwrap();
        for i in 0..r.coincidences.len() {
            assert!(r.coincidences[i] <= r.singles_a[i].min(r.singles_b[i]));
        }
    }

    #[test]
    fn zero_intensity_gives_zero_counts() {
        let cfg = ExperimentConfig {
            intensity_s: 0.0,
            pulse_subsample: 480_000,
            ..fast_cfg()
        };
        let r = run_sweep_stochastic(
            &cfg,
            &SweepSpec::for_setting(Polarization::Horizontal),
            SeedStream::new(1),
        )
        .unwrap();
        assert!(r
            .coincidences
            .iter()
            .chain(&r.singles_a)
            .chain(&r.singles_b)
            .all(|&c| c == 0.0));
        assert_eq!(r.visibility, 0.0);
    }

    #[test]
    fn stochastic_is_deterministic_per_seed() {
        let cfg = ExperimentConfig {
            pulse_subsample: 48_000,
            ..fast_cfg()
        };
        let sweep = SweepSpec::for_setting(Polarization::RightCircular);
        let a = run_sweep_stochastic(&cfg, &sweep, SeedStream::new(5)).unwrap();
        let b = run_sweep_stochastic(&cfg, &sweep, SeedStream::new(5)).unwrap();
        let c = run_sweep_stochastic(&cfg, &sweep, SeedStream::new(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.singles_a, c.singles_a);
        assert_eq!(a.count_scale, 48_000.0);
        assert_eq!(a.pulses, 4.8e9);
    }

    #[test]
    fn config_validation() {
        let bad = [
            ExperimentConfig {
                rep_rate: 0.0,
                ..Default::default()
            },
            ExperimentConfig {
                duration_per_setting: -1.0,
                ..Default::default()
            },
            ExperimentConfig {
                intensity_s: -1e-3,
                ..Default::default()
            },
            ExperimentConfig {
                rotations_per_point: 0,
                ..Default::default()
            },
            ExperimentConfig {
                pulse_subsample: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        }
        let cfg = ExperimentConfig {
            pulse_subsample: 10_000_000_000,
            ..Default::default()
        };
        assert!(run_sweep_stochastic(
            &cfg,
            &SweepSpec::for_setting(Polarization::Horizontal),
            SeedStream::new(1)
        )
        .is_err());
        assert!(full_experiment(&ExperimentConfig::default(), Mode::Stochastic, None).is_err());
    }

    #[test]
    fn default_schedule() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.simulated_pulses(), 1_000_000);
        let sched = cfg.schedule().unwrap();
        // Ten plate revolutions in 60 s: twenty depolarizer periods.
        assert!((cfg.duration_per_setting / sched.period() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_tail_test() {
        assert!((0.5 * erfc(3.0 / std::f64::consts::SQRT_2) - 0.001_349_898).abs() < 1e-7);
        assert!((erfc(-1.0) - 1.842_700_79).abs() < 2e-7);
        let (lo, hi) = poisson_tails(2, 2.0);
        assert!((lo - 0.676_676_416).abs() < 1e-8);
        assert!((hi - 0.593_994_150).abs() < 1e-8);
        assert!(poisson_consistent(1000, 1000.0, 3.0));
        assert!(poisson_consistent(1090, 1000.0, 3.0));
        assert!(!poisson_consistent(1100, 1000.0, 3.0));
        assert!(!poisson_consistent(900, 1000.0, 3.0));
        assert!(poisson_consistent(0, 1.6, 3.0));
        assert!(!poisson_consistent(8, 1.6, 3.0));
        assert!(poisson_consistent(0, 0.0, 3.0));
        assert!(!poisson_consistent(1, 0.0, 3.0));
        assert!((ln_factorial(25) - 58.003_605_222_980_52).abs() < 1e-10);
    }

    #[test]
    fn visibility_error_from_counts() {
        let phi = grid(18);
        let y: Vec<f64> = phi.iter().map(|p| 100.0 * (1.0 + p.cos() / 3.0)).collect();
        let fit = fit_sinusoid_weighted(&phi, &y, Some(&y)).unwrap();
        // Var(a₀) ≈ mean/n, Var(a₁) ≈ 2·mean/n → σ_V ≈ sqrt(2/(n·100)) roughly.
        let e = fit.visibility_error();
        assert!(e > 0.02 && e < 0.05, "{e}");
        assert_eq!(fit_sinusoid(&phi, &y).unwrap().visibility_error(), 0.0);
    }
}
