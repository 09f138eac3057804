//! Binary on/off photodetection of classical light.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// On/off detector with an overall detection efficiency.
///
/// Efficiency multiplies the intensity seen by the detector before the
/// click law is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    efficiency: f64,
}

impl DetectorModel {
    pub const IDEAL: Self = Self { efficiency: 1.0 };

    pub fn new(efficiency: f64) -> Result<Self> {
        if efficiency > 0.0 && efficiency <= 1.0 {
            Ok(Self { efficiency })
        } else {
            Err(domain(format!(
                "detector efficiency must lie in (0, 1], got {efficiency}"
            )))
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    /// Intensity effectively registered by the detector.
    pub fn effective(&self, intensity: f64) -> f64 {
        self.efficiency * intensity
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Probability that the detector fires for classical light of normalized
/// intensity `intensity`: `1 − exp(−η·s)`.
pub fn click_probability(intensity: f64, det: DetectorModel) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(domain(format!("intensity must be >= 0, got {intensity}")));
    }
    Ok(clicks(det.effective(intensity)))
}

/// Click law for an already efficiency-scaled, non-negative intensity.
#[inline]
pub(crate) fn clicks(s: f64) -> f64 {
    -(-s).exp_m1()
}

/// `(1 − e^{−s})/s`, the Haar average of `exp(−½(s + u·Ωs))`, with its
/// series limit near zero.
pub(crate) fn singles_average(s: f64) -> f64 {
    if s < 1e-6 {
        1.0 - s / 2.0 + s * s / 6.0
    } else {
        -(-s).exp_m1() / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn no_light_no_click() {
        assert_eq!(click_probability(0.0, DetectorModel::IDEAL).unwrap(), 0.0);
    }

    #[test]
    fn saturates() {
        let p = click_probability(50.0, DetectorModel::IDEAL).unwrap();
        assert!((p - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unit_intensity_matches_poisson_sampling() {
        let p = click_probability(1.0, DetectorModel::IDEAL).unwrap();
        assert!((p - 0.632_120_558_828_557_7).abs() < 1e-15);

        let poisson = Poisson::new(1.0).unwrap();
        let mut rng = SeedStream::new(5).rng();
        let n = 400_000;
        let hits = (0..n).filter(|_| poisson.sample(&mut rng) > 0.0).count();
        let freq = hits as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * sigma, "{freq} vs {p}");
    }

    #[test]
    fn efficiency_rescales_intensity() {
        let det = DetectorModel::new(0.5).unwrap();
        let a = click_probability(2.0, det).unwrap();
        let b = click_probability(1.0, DetectorModel::IDEAL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(click_probability(-1e-9, DetectorModel::IDEAL).is_err());
        assert!(click_probability(f64::NAN, DetectorModel::IDEAL).is_err());
        assert!(DetectorModel::new(0.0).is_err());
        assert!(DetectorModel::new(1.1).is_err());
        assert!(DetectorModel::new(1.0).is_ok());
    }

    #[test]
    fn concave_and_monotone_on_grid() {
        let h = 1e-3;
        let f = |s: f64| click_probability(s, DetectorModel::IDEAL).unwrap();
        for i in 1..2000 {
            let s = i as f64 * 0.01;
            assert!(f(s + h) >= f(s));
            assert!(f(s + h) - 2.0 * f(s) + f(s - h) <= 0.0);
        }
    }

    #[test]
    fn singles_series_is_continuous() {
        let below = singles_average(0.999_999e-6);
        let above = singles_average(1.000_001e-6);
        assert!((below - above).abs() < 1e-12);
        assert_eq!(singles_average(0.0), 1.0);
    }
}
