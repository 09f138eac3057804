//! Waveplates on the Bloch sphere and the counter-rotating two-plate
//! depolarizer.
//!
//! A plate with retardance δ and fast axis at physical angle θ rotates Bloch
//! vectors by δ about `(sin 2θ, 0, cos 2θ)`, right-handed. Two plates turning
//! in opposite directions at the same rate, with retardances π and
//! arccos(1/√3), sweep a linearly polarized input over a closed curve whose
//! first and second moments coincide with those of the Haar ensemble.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::{domain, Result};
use crate::rotation::{rotation_about, Rotation3};

/// Retardance of the second depolarizer plate, arccos(1/√3).
pub fn magic_retardance() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveplate {
    retardance: f64,
    axis_angle: f64,
}

impl Waveplate {
    /// Angles are reduced to retardance ∈ [0, 2π) and axis ∈ [0, π).
    pub fn new(retardance: f64, axis_angle: f64) -> Result<Self> {
        if !retardance.is_finite() || !axis_angle.is_finite() {
            return Err(domain("waveplate angles must be finite"));
        }
        Ok(Self {
            retardance: reduce(retardance, 2.0 * PI),
            axis_angle: reduce(axis_angle, PI),
        })
    }

    pub fn half_wave(axis_angle: f64) -> Self {
        Self {
            retardance: PI,
            axis_angle: reduce(axis_angle, PI),
        }
    }

    pub fn retardance(&self) -> f64 {
        self.retardance
    }

    pub fn axis_angle(&self) -> f64 {
        self.axis_angle
    }

    /// The same plate turned to a new fast-axis angle.
    pub fn at_angle(&self, axis_angle: f64) -> Self {
        Self {
            axis_angle: reduce(axis_angle, PI),
            ..*self
        }
    }
}

fn reduce(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Bloch-sphere action of a waveplate.
pub fn waveplate_rotation(wp: &Waveplate) -> Rotation3 {
    let (s, c) = (2.0 * wp.axis_angle).sin_cos();
    rotation_about(BlochVector::new(s, 0.0, c), wp.retardance)
        .expect("waveplate axis is unit by construction")
}

/// Which plate the light meets first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateOrder {
    HalfWaveFirst,
    MagicFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizerConfig {
    /// Upstream plate, turning at +ω.
    pub plate1: Waveplate,
    /// Downstream plate, turning at −ω.
    pub plate2: Waveplate,
    /// Rotation rate of each plate, rad/s.
    pub angular_velocity: f64,
    /// Linear input polarization (y = 0), unit length.
    pub input_polarization: BlochVector,
}

impl DepolarizerConfig {
    /// Plates with retardances π and arccos(1/√3), axes aligned at θ = 0,
    /// horizontally polarized input.
    pub fn nominal(order: PlateOrder, angular_velocity: f64) -> Result<Self> {
        let half = Waveplate::half_wave(0.0);
        let magic = Waveplate::new(magic_retardance(), 0.0)?;
        let (plate1, plate2) = match order {
            PlateOrder::HalfWaveFirst => (half, magic),
            PlateOrder::MagicFirst => (magic, half),
        };
        Self::new(plate1, plate2, angular_velocity, BlochVector::Z)
    }

    pub fn new(
        plate1: Waveplate,
        plate2: Waveplate,
        angular_velocity: f64,
        input_polarization: BlochVector,
    ) -> Result<Self> {
        if !(angular_velocity > 0.0 && angular_velocity.is_finite()) {
            return Err(domain(format!(
                "angular velocity must be > 0, got {angular_velocity}"
            )));
        }
        let input = input_polarization.require_unit("input polarization")?;
        if input.y.abs() > 1e-12 {
            return Err(domain("input polarization must be linear (y = 0)"));
        }
        Ok(Self {
            plate1,
            plate2,
            angular_velocity,
            input_polarization: input,
        })
    }

    /// Linear input at Bloch angle `chi` from horizontal towards +45°.
    pub fn with_input_angle(self, chi: f64) -> Self {
        Self {
            input_polarization: linear_polarization(chi),
            ..self
        }
    }

    /// Bloch angle of the input polarization, in [0, 2π).
    pub fn input_angle(&self) -> f64 {
        self.input_polarization
            .x
            .atan2(self.input_polarization.z)
            .rem_euclid(2.0 * PI)
    }

    /// Period of the combined transformation, π/ω.
    pub fn period(&self) -> f64 {
        PI / self.angular_velocity
    }

    /// Same plates with a different rotation rate.
    pub fn with_angular_velocity(self, angular_velocity: f64) -> Result<Self> {
        Self::new(
            self.plate1,
            self.plate2,
            angular_velocity,
            self.input_polarization,
        )
    }
}

/// Linear polarization at Bloch angle `chi` in the xz plane.
pub fn linear_polarization(chi: f64) -> BlochVector {
    let (s, c) = chi.sin_cos();
    BlochVector::new(s, 0.0, c)
}

/// Transformation applied by the depolarizer at time `t`: the upstream plate
/// sits at θ₀ + ωt, the downstream one at θ₀ − ωt, with both axes starting
/// from the configured angles (aligned for the nominal setup).
pub fn depolarizer_at(config: &DepolarizerConfig, t: f64) -> Result<Rotation3> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be >= 0, got {t}")));
    }
    Ok(depolarizer_rotation(config, t))
}

pub(crate) fn depolarizer_rotation(config: &DepolarizerConfig, t: f64) -> Rotation3 {
    let turn = config.angular_velocity * t;
    let first = config.plate1.at_angle(config.plate1.axis_angle + turn);
    let second = config.plate2.at_angle(config.plate2.axis_angle - turn);
    waveplate_rotation(&second) * waveplate_rotation(&first)
}

/// Time-averaged first and second moments of the output Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMoments {
    pub mean: BlochVector,
    pub second_moment: [[f64; 3]; 3],
}

impl TrajectoryMoments {
    /// `(|⟨s⟩|, max |⟨s sᵀ⟩ − (s²/3) I|)` against the Haar targets.
    pub fn isotropy_errors(&self, intensity: f64) -> (f64, f64) {
        let target = intensity * intensity / 3.0;
        let mut worst = 0.0_f64;
        for (i, row) in self.second_moment.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                let t = if i == j { target } else { 0.0 };
                worst = worst.max((m - t).abs());
            }
        }
        (self.mean.norm(), worst)
    }

    /// Moments of the pair `(s_a, s_b = −s_a)`:
    /// `(⟨s_b⟩, ⟨s_a s_bᵀ⟩) = (−⟨s_a⟩, −⟨s_a s_aᵀ⟩)`.
    pub fn anticorrelated_pair(&self) -> (BlochVector, [[f64; 3]; 3]) {
        let mut m = self.second_moment;
        m.iter_mut().flatten().for_each(|v| *v = -*v);
        (-self.mean, m)
    }
}

/// Moments over `n_samples` uniformly spaced times in one period, for an
/// output vector of length `intensity`.
pub fn trajectory_moments(
    config: &DepolarizerConfig,
    intensity: f64,
    n_samples: usize,
) -> Result<TrajectoryMoments> {
    if n_samples == 0 {
        return Err(domain("need at least one sample"));
    }
    if !(intensity >= 0.0) {
        return Err(domain(format!("intensity must be >= 0, got {intensity}")));
    }
    let dt = config.period() / n_samples as f64;
    let points = (0..n_samples).map(|k| {
        depolarizer_rotation(config, k as f64 * dt)
            .apply(config.input_polarization.scale(intensity))
    });
    Ok(moments_of(points))
}

pub(crate) fn moments_of(points: impl Iterator<Item = BlochVector>) -> TrajectoryMoments {
    let mut n = 0usize;
    let mut mean = BlochVector::ZERO;
    let mut second = [[0.0; 3]; 3];
    for v in points {
        n += 1;
        mean = mean + v;
        let a = v.to_array();
        for i in 0..3 {
            for j in 0..3 {
                second[i][j] += a[i] * a[j];
            }
        }
    }
    let inv = 1.0 / n as f64;
    second.iter_mut().flatten().for_each(|v| *v *= inv);
    TrajectoryMoments {
        mean: mean.scale(inv),
        second_moment: second,
    }
}

/// The closed curve traced by the unit input over one period,
/// `n_samples` points including both endpoints.
pub fn trajectory_path(config: &DepolarizerConfig, n_samples: usize) -> Result<Vec<BlochVector>> {
    if n_samples < 2 {
        return Err(domain("a path needs at least two samples"));
    }
    let dt = config.period() / (n_samples - 1) as f64;
    Ok((0..n_samples)
        .map(|k| depolarizer_rotation(config, k as f64 * dt).apply(config.input_polarization))
        .collect())
}

/// Result of checking a configuration against the Haar moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsotropyCheck {
    pub input_angle: f64,
    pub mean_error: f64,
    pub second_moment_error: f64,
    pub passed: bool,
}

/// Scans linear input angles `χ = kπ/n_angles` (k = 0, 1, …) and returns
/// the first configuration whose unit-intensity moments match the Haar
/// targets within `tolerance`, or `None` if none does.
pub fn scan_input_angle(
    config: &DepolarizerConfig,
    n_angles: usize,
    n_samples: usize,
    tolerance: f64,
) -> Result<Option<(DepolarizerConfig, IsotropyCheck)>> {
    for k in 0..n_angles.max(1) {
        let chi = PI * k as f64 / n_angles.max(1) as f64;
        let candidate = config.with_input_angle(chi);
        let check = isotropy_check(&candidate, n_samples, tolerance)?;
        if check.passed {
            return Ok(Some((candidate, check)));
        }
    }
    Ok(None)
}

pub fn isotropy_check(
    config: &DepolarizerConfig,
    n_samples: usize,
    tolerance: f64,
) -> Result<IsotropyCheck> {
    let m = trajectory_moments(config, 1.0, n_samples)?;
    let (mean_error, second_moment_error) = m.isotropy_errors(1.0);
    Ok(IsotropyCheck {
        input_angle: config.input_angle(),
        mean_error,
        second_moment_error,
        passed: mean_error <= tolerance && second_moment_error <= tolerance,
    })
}
