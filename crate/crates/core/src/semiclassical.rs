//! Semiclassical coincidence statistics for rotationally invariant ensembles
//! of classical beam pairs measured with on/off detectors.
//!
//! For a fixed pair `(s_a, s_b)` averaged over a common Haar-random rotation
//! Ω, the coincidence probability is
//!
//! ```text
//! p = 1 − f(|s_a|) − f(|s_b|) + exp(−(|s_a| + |s_b|)/2) · U,
//! f(s) = (1 − e^{−s})/s,
//! U = ∫dΩ exp(−(u_a·Ω s_a + u_b·Ω s_b)/2).
//! ```
//!
//! All polarization dependence sits in the kernel `U`. It has closed forms
//! for parallel and antiparallel pairs of equal intensity, and is bracketed
//! by `cosh((|s_a| − |s_b|)/4) ≤ U ≤ sqrt(sinhc|s_a| · sinhc|s_b|)` in general.

use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::detector::{clicks, singles_average, DetectorModel};
use crate::error::{config, domain, Result};
use crate::quadrature::HaarQuadrature;
use crate::rng::{chunked_mean, SeedStream};
use crate::rotation::{haar_rotation, Rotation3};

/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// Below this the removable singularities switch to Taylor series.
const SERIES_THRESHOLD: f64 = 1e-2;

/// One preparation of the two beams: generalized Bloch vectors whose length
/// is the beam intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPair {
    pub s_a: BlochVector,
    pub s_b: BlochVector,
}

impl BeamPair {
    pub fn new(s_a: BlochVector, s_b: BlochVector) -> Self {
        Self { s_a, s_b }
    }

    /// Equal intensities `s`, orthogonal polarizations (`s_b = −s_a`).
    pub fn anti(s: f64, direction: BlochVector) -> Self {
        let s_a = direction.normalized().unwrap_or(BlochVector::Z).scale(s);
        Self::new(s_a, -s_a)
    }

    /// Equal intensities `s`, identical polarizations.
    pub fn parallel(s: f64, direction: BlochVector) -> Self {
        let s_a = direction.normalized().unwrap_or(BlochVector::Z).scale(s);
        Self::new(s_a, s_a)
    }

    pub fn norms(&self) -> (f64, f64) {
        (self.s_a.norm(), self.s_b.norm())
    }

    /// Both vectors rescaled by the detection efficiency.
    pub fn detected(&self, det: DetectorModel) -> Self {
        let k = det.efficiency();
        Self::new(self.s_a.scale(k), self.s_b.scale(k))
    }

    pub fn rotated(&self, r: &Rotation3) -> Self {
        Self::new(r.apply(self.s_a), r.apply(self.s_b))
    }
}

/// A finite mixture of beam pairs with non-negative weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEnsemble {
    members: Vec<(f64, BeamPair)>,
}

impl WeightedEnsemble {
    /// Weights need not be normalized but must be non-negative with a
    /// positive sum.
    pub fn new(members: Vec<(f64, BeamPair)>) -> Result<Self> {
        if members.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(domain("ensemble weights must be non-negative"));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(domain("ensemble weights must have a positive sum"));
        }
        Ok(Self {
            members: members.into_iter().map(|(w, p)| (w / total, p)).collect(),
        })
    }

    pub fn single(pair: BeamPair) -> Self {
        Self {
            members: vec![(1.0, pair)],
        }
    }

    /// Equal-weight mixture.
    pub fn uniform(pairs: impl IntoIterator<Item = BeamPair>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|p| (1.0, p)).collect())
    }

    pub fn members(&self) -> &[(f64, BeamPair)] {
        &self.members
    }

    pub fn average<F: Fn(&BeamPair) -> f64>(&self, f: F) -> f64 {
        self.members.iter().map(|(w, p)| w * f(p)).sum()
    }
}

/// Monte Carlo estimate with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }

    /// Whether `target` lies within `k` standard errors. A floor of 1e−12
    /// absorbs rounding when the estimator has zero variance.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + 1e-12 * target.abs().max(1.0)
    }
}

/// How the Haar average over Ω is carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AveragingMethod {
    MonteCarlo {
        samples: usize,
        stream: SeedStream,
    },
    /// Tensor-product Gauss–Legendre rule with `nodes` points per Euler angle.
    Quadrature {
        nodes: usize,
    },
}

/// Intensity transmitted by a polarizer selecting `u`: `½(|s| + u·s)`.
pub fn polarizer_intensity(s: BlochVector, u: BlochVector) -> Result<f64> {
    let u = u.require_unit("polarizer setting")?;
    Ok(transmitted(s, u))
}

#[inline]
fn transmitted(s: BlochVector, u: BlochVector) -> f64 {
    let n = s.norm();
    (0.5 * (n + u.dot(s))).clamp(0.0, n)
}

#[inline]
fn kernel_integrand(pair: &BeamPair, u_a: BlochVector, u_b: BlochVector, r: &Rotation3) -> f64 {
    (-0.5 * (u_a.dot(r.apply(pair.s_a)) + u_b.dot(r.apply(pair.s_b)))).exp()
}

#[inline]
fn coincidence_integrand(
    pair: &BeamPair,
    u_a: BlochVector,
    u_b: BlochVector,
    r: &Rotation3,
) -> f64 {
    clicks(transmitted(r.apply(pair.s_a), u_a)) * clicks(transmitted(r.apply(pair.s_b), u_b))
}

fn check_settings(u_a: BlochVector, u_b: BlochVector) -> Result<()> {
    u_a.require_unit("u_a")?;
    u_b.require_unit("u_b")?;
    Ok(())
}

/// Haar Monte Carlo estimate of the polarization kernel `U`.
///
/// Writing `s_a = |s_a| e` and absorbing the reference direction into Ω,
/// the integrand is `exp(−(|s_a| u_a·Ωe + u_b·Ω s_b)/2)`; rotating the full
/// vectors is the same thing and needs no special case for `s_a = 0`.
pub fn u_kernel_mc(
    pair: &BeamPair,
    u_a: BlochVector,
    u_b: BlochVector,
    samples: usize,
    stream: SeedStream,
) -> Result<Estimate> {
    check_settings(u_a, u_b)?;
    if samples == 0 {
        return Err(domain("Monte Carlo sample count must be at least 1"));
    }
    let m = chunked_mean(stream, samples, |rng| {
        let r = haar_rotation(rng);
        kernel_integrand(pair, u_a, u_b, &r)
    });
    Ok(Estimate {
        value: m.mean(),
        std_error: m.std_error(),
    })
}

/// Deterministic quadrature value of the kernel `U`.
pub fn u_kernel_quadrature(
    pair: &BeamPair,
    u_a: BlochVector,
    u_b: BlochVector,
    rule: &HaarQuadrature,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    Ok(rule.integrate(|r| kernel_integrand(pair, u_a, u_b, r)))
}

/// Coincidence probability assembled from the kernel value `u` for
/// (already efficiency-scaled) intensities `sa`, `sb`.
pub fn coincidence_from_kernel(sa: f64, sb: f64, u: f64) -> f64 {
    let damp = (-0.5 * (sa + sb)).exp();
    polarization_free_part(sa, sb) + damp * (u - 1.0)
}

/// `1 − f(a) − f(b) + exp(−(a+b)/2)`, the coincidence probability at U = 1.
fn polarization_free_part(a: f64, b: f64) -> f64 {
    if a == b {
        return equal_intensity_free_part(a);
    }
    1.0 - singles_average(a) - singles_average(b) + (-0.5 * (a + b)).exp()
}

/// `1 − 2(1 − e^{−s})/s + e^{−s} = Σ_{k≥2} (−1)^k (k−1) s^k/(k+1)!`.
fn equal_intensity_free_part(s: f64) -> f64 {
    if s < 0.5 {
        // term_k = (−1)^k s^k/(k+1)!; 20 terms reach machine precision.
        let mut term = s * s / 6.0;
        let mut sum = 0.0_f64;
        for k in 2..22 {
            sum += (k - 1) as f64 * term;
            term *= -s / (k + 2) as f64;
        }
        sum
    } else {
        1.0 - 2.0 * singles_average(s) + (-s).exp()
    }
}

/// `e^{−s}(sinh(y)/y − 1)` for `0 ≤ y ≤ s` without overflow or cancellation.
fn damped_sinhc_minus_one(y: f64, s: f64) -> f64 {
    if y < SERIES_THRESHOLD {
        let y2 = y * y;
        (-s).exp() * y2 / 6.0 * (1.0 + y2 / 20.0 * (1.0 + y2 / 42.0))
    } else {
        0.5 * ((y - s).exp() - (-y - s).exp()) / y - (-s).exp()
    }
}

/// `sinh(x)/x` with its limit at 0.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0))
    } else {
        x.sinh() / x
    }
}

/// Haar-averaged coincidence probability of one beam pair.
///
/// Efficiency rescales both intensities before the click law. The Monte
/// Carlo method samples the click-product integrand directly, which has the
/// same mean as the kernel route and much lower variance for weak beams.
pub fn omega_averaged_coincidence(
    pair: &BeamPair,
    u_a: BlochVector,
    u_b: BlochVector,
    det: DetectorModel,
    method: AveragingMethod,
) -> Result<Estimate> {
    check_settings(u_a, u_b)?;
    let pair = pair.detected(det);
    let est = match method {
        AveragingMethod::MonteCarlo { samples, stream } => {
            if samples == 0 {
                return Err(config("Monte Carlo sample count must be at least 1"));
            }
            let m = chunked_mean(stream, samples, |rng| {
                let r = haar_rotation(rng);
                coincidence_integrand(&pair, u_a, u_b, &r)
            });
            Estimate {
                value: m.mean(),
                std_error: m.std_error(),
            }
        }
        AveragingMethod::Quadrature { nodes } => {
            if nodes == 0 {
                return Err(config("quadrature needs at least one node per axis"));
            }
            let rule = HaarQuadrature::new(nodes)?;
            Estimate::exact(rule.integrate(|r| coincidence_integrand(&pair, u_a, u_b, r)))
        }
    };
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        ..est
    })
}

/// Coincidence probability of a weighted ensemble, each member Haar-averaged.
pub fn ensemble_coincidence(
    ensemble: &WeightedEnsemble,
    u_a: BlochVector,
    u_b: BlochVector,
    det: DetectorModel,
    rule: &HaarQuadrature,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    Ok(ensemble.average(|p| {
        let p = p.detected(det);
        rule.integrate(|r| coincidence_integrand(&p, u_a, u_b, r))
    }))
}

fn check_closed_args(s: f64, alpha: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(domain(format!("intensity must be > 0, got {s}")));
    }
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(domain(format!("angle must lie in [0, π], got {alpha}")));
    }
    Ok(())
}

/// Closed-form coincidence probability for orthogonally polarized beams of
/// equal intensity `s` (`s_b = −s_a`), as a function of the angle `alpha`
/// between the two analyzer settings on the Bloch sphere.
pub fn coincidence_closed_anti(s: f64, alpha: f64) -> Result<f64> {
    check_closed_args(s, alpha)?;
    Ok(closed_form(s, (0.5 * alpha).sin()))
}

/// Closed form for identically polarized beams (`s_b = s_a`).
pub fn coincidence_closed_parallel(s: f64, alpha: f64) -> Result<f64> {
    check_closed_args(s, alpha)?;
    Ok(closed_form(s, (0.5 * alpha).cos()))
}

/// `1 + (2/s)[e^{−s}(1 + sinh(s x)/(2x)) − 1]`, evaluated as
/// `free(s) + e^{−s}(sinh(sx)/(sx) − 1)`.
fn closed_form(s: f64, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    equal_intensity_free_part(s) + damped_sinhc_minus_one(s * x, s)
}

fn check_norm(v: f64, what: &str) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "{what} must be a finite non-negative intensity, got {v}"
        )))
    }
}

/// Lower bound on the kernel: `cosh((|s_a| − |s_b|)/4)`.
pub fn u_lower_bound(sa_norm: f64, sb_norm: f64) -> Result<f64> {
    check_norm(sa_norm, "|s_a|")?;
    check_norm(sb_norm, "|s_b|")?;
    Ok((0.25 * (sa_norm - sb_norm)).cosh())
}

/// Upper bound on the kernel: `sqrt(sinh|s_a| sinh|s_b| / (|s_a||s_b|))`.
pub fn u_upper_bound(sa_norm: f64, sb_norm: f64) -> Result<f64> {
    check_norm(sa_norm, "|s_a|")?;
    check_norm(sb_norm, "|s_b|")?;
    Ok((sinhc(sa_norm) * sinhc(sb_norm)).sqrt())
}

/// Visibility for equal intensities and orthogonal (or identical)
/// polarizations:
/// `(sinh s − s)/(s + (2s − 3) sinh s + 2(s − 2) cosh s + 4)`.
///
/// Computed from the extremes of the closed form, which is algebraically
/// identical and stays accurate as `s → 0` (limit 1/3).
pub fn visibility_symmetric(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain(format!(
            "intensity must be > 0, got {s}; the s → 0 limit is 1/3"
        )));
    }
    let low = equal_intensity_free_part(s);
    let swing = damped_sinhc_minus_one(s, s);
    Ok(swing / (2.0 * low + swing))
}

/// Weak-intensity approximation `¼(⟨|s_a||s_b|⟩ + ⅓⟨s_a·s_b⟩ cos α)` for a
/// rotationally invariant ensemble.
pub fn weak_limit_coincidence(
    ensemble: &WeightedEnsemble,
    u_a: BlochVector,
    u_b: BlochVector,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    let (norms, dots) = weak_moments(ensemble);
    Ok(0.25 * (norms + dots * u_a.dot(u_b) / 3.0))
}

/// Visibility of the weak-limit law, `|⟨s_a·s_b⟩| / (3⟨|s_a||s_b|⟩)`.
pub fn weak_limit_visibility(ensemble: &WeightedEnsemble) -> Result<f64> {
    let (norms, dots) = weak_moments(ensemble);
    if !(norms > 0.0) {
        return Err(domain("ensemble has no intensity in one of the beams"));
    }
    Ok(dots.abs() / (3.0 * norms))
}

fn weak_moments(ensemble: &WeightedEnsemble) -> (f64, f64) {
    let norms = ensemble.average(|p| p.s_a.norm() * p.s_b.norm());
    let dots = ensemble.average(|p| p.s_a.dot(p.s_b));
    (norms, dots)
}

/// Weak-intensity coincidence probability of a fixed (not Haar-averaged)
/// ensemble, from its first and second moments:
/// `¼(⟨|s_a||s_b|⟩ + u_a·⟨|s_b| s_a⟩ + u_b·⟨|s_a| s_b⟩ + u_aᵀ⟨s_a s_bᵀ⟩u_b)`.
pub fn weak_limit_moment_coincidence(
    ensemble: &WeightedEnsemble,
    u_a: BlochVector,
    u_b: BlochVector,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    Ok(ensemble.average(|p| {
        let (a, b) = p.norms();
        0.25 * (a * b + b * u_a.dot(p.s_a) + a * u_b.dot(p.s_b) + u_a.dot(p.s_a) * u_b.dot(p.s_b))
    }))
}

/// Kernel expanded to first order in `|s_a|`:
/// `U ≈ 2 sinh(b/2)/b + (u_a·u_b)(s_a·s_b)/b² · (cosh(b/2) − 2 sinh(b/2)/b)`.
pub fn small_sa_kernel(
    s_a: BlochVector,
    s_b: BlochVector,
    u_a: BlochVector,
    u_b: BlochVector,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    let b = s_b.norm();
    Ok(sinhc(0.5 * b) + u_a.dot(u_b) * s_a.dot(s_b) * cross_term_coefficient(b))
}

/// `(cosh(b/2) − 2 sinh(b/2)/b)/b²`, tending to 1/12 as b → 0.
fn cross_term_coefficient(b: f64) -> f64 {
    let h = 0.5 * b;
    if h < SERIES_THRESHOLD {
        let h2 = h * h;
        1.0 / 12.0 + h2 / 120.0 + h2 * h2 / 3360.0
    } else {
        (h.cosh() - h.sinh() / h) / (b * b)
    }
}

/// Coincidence probability using the first-order-in-`|s_a|` kernel.
///
/// Uses `exp(−b/2)·2 sinh(b/2)/b = f(b)` to write
/// `p = (e^{−a/2} − f(a)) + (1 − f(b))(1 − e^{−a/2}) + e^{−(a+b)/2} c X(b)`
/// with `c = (u_a·u_b)(s_a·s_b)`, which avoids the O(1) cancellations of
/// the textbook form when both beams are weak.
pub fn small_sa_coincidence(
    s_a: BlochVector,
    s_b: BlochVector,
    u_a: BlochVector,
    u_b: BlochVector,
) -> Result<f64> {
    check_settings(u_a, u_b)?;
    let (a, b) = (s_a.norm(), s_b.norm());
    let cross = u_a.dot(u_b) * s_a.dot(s_b) * cross_term_coefficient(b);
    Ok(half_damping_minus_singles(a)
        + one_minus_singles(b) * -(-0.5 * a).exp_m1()
        + (-0.5 * (a + b)).exp() * cross)
}

/// `1 − (1 − e^{−b})/b = Σ_{k≥1} (−1)^{k+1} b^k/(k+1)!`.
fn one_minus_singles(b: f64) -> f64 {
    if b < 0.5 {
        let mut term = 0.5 * b;
        let mut sum = 0.0_f64;
        for k in 1..24 {
            sum += term;
            term *= -b / (k + 2) as f64;
        }
        sum
    } else {
        1.0 - singles_average(b)
    }
}

/// `e^{−a/2} − (1 − e^{−a})/a = Σ_k (−a)^k [1/(2^k k!) − 1/(k+1)!]`.
fn half_damping_minus_singles(a: f64) -> f64 {
    if a < 0.5 {
        let (mut half, mut full) = (1.0_f64, 1.0_f64); // (−a/2)^k/k!, (−a)^k/(k+1)!
        let mut sum = 0.0;
        for k in 1..24 {
            half *= -0.5 * a / k as f64;
            full *= -a / (k + 1) as f64;
            sum += half - full;
        }
        sum
    } else {
        (-0.5 * a).exp() - singles_average(a)
    }
}

/// Visibility of the first-order expansion: the extremes occur where
/// `(u_a·u_b)(s_a·s_b) = ±|s_a||s_b|`.
pub fn small_sa_visibility(sa_norm: f64, sb_norm: f64) -> Result<f64> {
    check_norm(sa_norm, "|s_a|")?;
    check_norm(sb_norm, "|s_b|")?;
    let s_a = BlochVector::Z.scale(sa_norm);
    let s_b = BlochVector::Z.scale(sb_norm);
    let u = BlochVector::Z;
    // c = ±|s_a||s_b|
    let hi = small_sa_coincidence(s_a, s_b, u, u)?;
    let lo = small_sa_coincidence(s_a, s_b, u, -u)?;
    let (hi, lo) = (hi.max(lo), hi.min(lo));
    if !(hi + lo > 0.0) {
        return Err(domain(
            "visibility undefined for vanishing coincidence probability",
        ));
    }
    Ok((hi - lo) / (hi + lo))
}

/// Upper bound on the visibility for intensities `(|s_a|, |s_b|)`, obtained
/// by inserting the kernel bounds into the Haar-averaged probability.
pub fn visibility_bound_surface(sa_norm: f64, sb_norm: f64) -> Result<f64> {
    if !(sa_norm > 0.0 && sb_norm > 0.0) {
        return Err(domain("both intensities must be > 0"));
    }
    let hi = coincidence_from_kernel(sa_norm, sb_norm, u_upper_bound(sa_norm, sb_norm)?);
    let lo = coincidence_from_kernel(sa_norm, sb_norm, u_lower_bound(sa_norm, sb_norm)?);
    Ok((hi - lo) / (hi + lo))
}

/// Coincidence probability with polarizers removed: both detectors see
/// their whole beam.
pub fn p_total(sa_norm: f64, sb_norm: f64, det: DetectorModel) -> Result<f64> {
    check_norm(sa_norm, "|s_a|")?;
    check_norm(sb_norm, "|s_b|")?;
    Ok(clicks(det.effective(sa_norm)) * clicks(det.effective(sb_norm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::PI;

    // Reference values evaluated independently at 30 significant digits.
    const ANTI_S1_ALPHA0: f64 = 0.103_638_323_514_326_96;
    const ANTI_S1_HALF_PI: f64 = 0.135_070_546_758_464_47;
    const ANTI_S1_PI: f64 = 0.168_091_240_724_578_3;
    const VIS_S1: f64 = 0.237_195_085_454_831_77;

    /// The visibility formula exactly as written, for moderate `s`.
    fn visibility_literal(s: f64) -> f64 {
        (s.sinh() - s) / (s + (2.0 * s - 3.0) * s.sinh() + 2.0 * (s - 2.0) * s.cosh() + 4.0)
    }

    /// The anti closed form exactly as written, for `alpha` away from 0.
    fn anti_literal(s: f64, alpha: f64) -> f64 {
        let x = (alpha / 2.0).sin();
        1.0 + 2.0 / s * ((-s).exp() * (1.0 + (s * x).sinh() / (2.0 * x)) - 1.0)
    }

    #[test]
    fn polarizer_malus_cases() {
        let s = BlochVector::new(0.3, -0.4, 1.2);
        let u = s.normalized().unwrap();
        assert!((polarizer_intensity(s, u).unwrap() - s.norm()).abs() < 1e-15);
        assert!(polarizer_intensity(s, -u).unwrap().abs() < 1e-15);
        let perp = u.cross(BlochVector::X).normalized().unwrap();
        assert!((polarizer_intensity(s, perp).unwrap() - s.norm() / 2.0).abs() < 1e-15);
        assert!(polarizer_intensity(s, s).is_err());
    }

    #[test]
    fn closed_anti_frozen_values() {
        assert!((coincidence_closed_anti(1.0, 0.0).unwrap() - ANTI_S1_ALPHA0).abs() < 1e-15);
        assert!((coincidence_closed_anti(1.0, PI / 2.0).unwrap() - ANTI_S1_HALF_PI).abs() < 1e-15);
        assert!((coincidence_closed_anti(1.0, PI).unwrap() - ANTI_S1_PI).abs() < 1e-15);
    }

    #[test]
    fn closed_anti_matches_literal_formula() {
        for s in [0.1, 1.0, 3.0, 10.0] {
            for k in 1..=12 {
                let a = PI * k as f64 / 12.0;
                let d = coincidence_closed_anti(s, a).unwrap() - anti_literal(s, a);
                assert!(d.abs() < 1e-13, "s={s} α={a}: {d}");
            }
        }
    }

    #[test]
    fn closed_forms_are_mirror_images() {
        for s in [0.0025, 0.5, 1.0, 10.0] {
            for k in 0..=24 {
                let a = PI * k as f64 / 24.0;
                let p = coincidence_closed_parallel(s, a).unwrap();
                let q = coincidence_closed_anti(s, PI - a).unwrap();
                assert!((p - q).abs() < 1e-12);
            }
        }
        assert!((coincidence_closed_parallel(1.0, PI).unwrap() - ANTI_S1_ALPHA0).abs() < 1e-15);
        assert!((coincidence_closed_parallel(1.0, 0.0).unwrap() - ANTI_S1_PI).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_monotone_in_alpha() {
        for s in [1e-4, 0.0025, 1.0, 10.0, 40.0] {
            let mut prev = coincidence_closed_anti(s, 0.0).unwrap();
            for k in 1..=500 {
                let p = coincidence_closed_anti(s, PI * k as f64 / 500.0).unwrap();
                assert!(p >= prev && (0.0..=1.0).contains(&p));
                prev = p;
            }
        }
    }

    #[test]
    fn closed_form_continuous_across_series_switch() {
        let s = 2.0;
        let x0 = SERIES_THRESHOLD / s;
        let a_lo = 2.0 * (x0 * (1.0 - 1e-9)).asin();
        let a_hi = 2.0 * (x0 * (1.0 + 1e-9)).asin();
        let d =
            coincidence_closed_anti(s, a_hi).unwrap() - coincidence_closed_anti(s, a_lo).unwrap();
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn closed_form_errors() {
        assert!(coincidence_closed_anti(0.0, 1.0).is_err());
        assert!(coincidence_closed_anti(-1.0, 1.0).is_err());
        assert!(coincidence_closed_anti(1.0, -0.1).is_err());
        assert!(coincidence_closed_parallel(1.0, 3.2).is_err());
    }

    #[test]
    fn kernel_bounds_values() {
        assert_eq!(u_lower_bound(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(u_lower_bound(0.0, 0.0).unwrap(), 1.0);
        assert!((u_lower_bound(4.0, 0.0).unwrap() - 1.543_080_634_815_243_7).abs() < 1e-15);
        assert!((u_upper_bound(1.0, 1.0).unwrap() - 1.175_201_193_643_801_4).abs() < 1e-15);
        assert_eq!(u_upper_bound(0.0, 0.0).unwrap(), 1.0);
        assert!(u_lower_bound(-1.0, 0.0).is_err());
        assert!(u_upper_bound(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn upper_bound_dominates_lower_bound() {
        for i in 0..50 {
            for j in 0..50 {
                let (a, b) = (10.0 * i as f64 / 49.0, 10.0 * j as f64 / 49.0);
                assert!(u_upper_bound(a, b).unwrap() >= u_lower_bound(a, b).unwrap());
            }
        }
    }

    #[test]
    fn symmetric_visibility_values() {
        assert!((visibility_symmetric(1.0).unwrap() - VIS_S1).abs() < 1e-15);
        assert!((visibility_symmetric(1e-6).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        assert!((visibility_symmetric(1e-12).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(visibility_symmetric(0.0).is_err());
        for s in [0.1, 1.0, 5.0, 10.0] {
            let d = visibility_symmetric(s).unwrap() - visibility_literal(s);
            assert!(d.abs() < 1e-12, "s={s}: {d}");
        }
    }

    #[test]
    fn symmetric_visibility_equals_closed_form_extremes() {
        for s in [0.1, 1.0, 5.0, 10.0] {
            let hi = coincidence_closed_anti(s, PI).unwrap();
            let lo = coincidence_closed_anti(s, 0.0).unwrap();
            assert!(((hi - lo) / (hi + lo) - visibility_symmetric(s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_visibility_monotone() {
        let mut prev = f64::INFINITY;
        for k in 0..=400 {
            let s = 1e-3 * (2e4f64).powf(k as f64 / 400.0);
            let v = visibility_symmetric(s).unwrap();
            assert!(v < prev && v > 0.0 && v <= 1.0 / 3.0);
            prev = v;
        }
        // Large intensities stay finite.
        assert!(visibility_symmetric(800.0).unwrap().is_finite());
    }

    #[test]
    fn kernel_route_reproduces_closed_form() {
        // With s_b = −s_a the kernel is sinh(s sin(α/2))/(s sin(α/2)).
        for s in [0.0025, 1.0, 10.0] {
            for k in 0..=12 {
                let alpha = PI * k as f64 / 12.0;
                let y = s * (alpha / 2.0).sin();
                let p = coincidence_from_kernel(s, s, sinhc(y));
                let q = coincidence_closed_anti(s, alpha).unwrap();
                assert!((p - q).abs() < 1e-15, "s={s} α={alpha}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn weak_limit_single_pair() {
        let s = 0.0025;
        let ens = WeightedEnsemble::single(BeamPair::anti(s, BlochVector::Z));
        let u = BlochVector::X;
        let p0 = weak_limit_coincidence(&ens, u, u).unwrap();
        let p1 = weak_limit_coincidence(&ens, u, -u).unwrap();
        assert!((p0 - s * s / 4.0 * (2.0 / 3.0)).abs() < 1e-20);
        assert!((p1 - s * s / 4.0 * (4.0 / 3.0)).abs() < 1e-20);
        assert!((p0 - 1.041_666_666_666_666_7e-6).abs() < 1e-18);
        assert!((weak_limit_visibility(&ens).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weak_limit_visibility_never_exceeds_third() {
        let mut rng = crate::SeedStream::new(9).rng();
        for _ in 0..200 {
            let pairs: Vec<(f64, BeamPair)> = (0..5)
                .map(|_| {
                    let a = haar_rotation(&mut rng)
                        .apply(BlochVector::Z)
                        .scale(rng.gen::<f64>());
                    let b = haar_rotation(&mut rng)
                        .apply(BlochVector::Z)
                        .scale(rng.gen::<f64>());
                    (rng.gen::<f64>(), BeamPair::new(a, b))
                })
                .collect();
            let ens = WeightedEnsemble::new(pairs).unwrap();
            assert!(weak_limit_visibility(&ens).unwrap() <= 1.0 / 3.0 + 1e-15);
        }
    }

    #[test]
    fn weighted_ensemble_validation() {
        let p = BeamPair::anti(1.0, BlochVector::Z);
        assert!(WeightedEnsemble::new(vec![]).is_err());
        assert!(WeightedEnsemble::new(vec![(-1.0, p), (2.0, p)]).is_err());
        assert!(WeightedEnsemble::new(vec![(0.0, p)]).is_err());
        let e = WeightedEnsemble::new(vec![(2.0, p), (6.0, p)]).unwrap();
        assert_eq!(e.members()[0].0, 0.25);
    }

    #[test]
    fn small_sa_zeroth_order() {
        let s_b = BlochVector::new(0.0, 0.6, 0.8);
        let u = small_sa_kernel(BlochVector::ZERO, s_b, BlochVector::Z, BlochVector::X).unwrap();
        assert!((u - 2.0 * 0.5f64.sinh()).abs() < 1e-15);
        // b → 0 limit of the cross-term coefficient.
        assert!((cross_term_coefficient(0.0) - 1.0 / 12.0).abs() < 1e-18);
        let b = 2.0 * SERIES_THRESHOLD;
        let direct = ((b / 2.0).cosh() - (b / 2.0).sinh() * 2.0 / b) / (b * b);
        assert!((cross_term_coefficient(b * (1.0 - 1e-9)) - direct).abs() < 1e-9);
    }

    #[test]
    fn small_sa_stable_form_matches_kernel_form() {
        let u_a = BlochVector::from_spherical(0.4, 0.2);
        let u_b = BlochVector::from_spherical(2.0, -1.0);
        for (a, b) in [(0.3, 1.0), (0.01, 2.0), (1e-3, 1.0), (0.6, 0.2)] {
            let s_a = BlochVector::from_spherical(1.0, 0.5).scale(a);
            let s_b = BlochVector::from_spherical(2.5, 1.5).scale(b);
            let stable = small_sa_coincidence(s_a, s_b, u_a, u_b).unwrap();
            let kernel =
                coincidence_from_kernel(a, b, small_sa_kernel(s_a, s_b, u_a, u_b).unwrap());
            assert!(
                (stable - kernel).abs() < 1e-14,
                "({a},{b}): {stable} vs {kernel}"
            );
        }
        assert!((one_minus_singles(0.4999) - one_minus_singles(0.5001)).abs() < 1e-4);
        assert!(
            (half_damping_minus_singles(0.4999) - half_damping_minus_singles(0.5001)).abs() < 1e-4
        );
    }

    #[test]
    fn small_sa_visibility_values() {
        // Frozen from a 30-digit evaluation of the expanded kernel.
        let v = small_sa_visibility(1e-3, 1.0).unwrap();
        assert!((v - 0.281_711_546_197_162_6).abs() < 1e-12, "{v}");
        let v = small_sa_visibility(1e-6, 1.0).unwrap();
        assert!((v - 0.281_718_164_927_182_5).abs() < 1e-9, "{v}");
        // Weak second beam as well: the limit 1/3 is reached.
        let v = small_sa_visibility(1e-9, 1e-4).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn bound_surface_values() {
        for s in [0.1, 1.0, 5.0, 10.0] {
            let d = visibility_bound_surface(s, s).unwrap() - visibility_symmetric(s).unwrap();
            assert!(d.abs() < 1e-12, "s={s}: {d}");
        }
        assert!(visibility_bound_surface(5.0, 5.0).unwrap() <= 1.0 / 3.0);
        let near_axis = visibility_bound_surface(0.01, 5.0).unwrap();
        assert!(
            (near_axis - 1.979_013_411_806_883).abs() < 1e-9,
            "{near_axis}"
        );
        assert!(visibility_bound_surface(0.0, 1.0).is_err());
    }

    #[test]
    fn p_total_values() {
        assert_eq!(p_total(0.0, 3.0, DetectorModel::IDEAL).unwrap(), 0.0);
        let p = p_total(1.0, 1.0, DetectorModel::IDEAL).unwrap();
        assert!((p - 0.399_576_400_893_728_05).abs() < 1e-15);
        let half = DetectorModel::new(0.5).unwrap();
        assert_eq!(p_total(2.0, 2.0, half).unwrap(), p);
    }

    #[test]
    fn normalized_curves_below_singlet_for_weak_beams() {
        // At s = 10 both detectors saturate and the normalized curve sits
        // near 1; only its visibility is small.
        for s in [0.0025, 1.0] {
            let n = coincidence_closed_anti(s, PI).unwrap()
                / p_total(s, s, DetectorModel::IDEAL).unwrap();
            assert!(n < 0.5, "s={s}: {n}");
        }
    }

    #[test]
    fn zero_intensity_coincidence_vanishes() {
        let pair = BeamPair::new(BlochVector::ZERO, BlochVector::ZERO);
        let u = BlochVector::Z;
        let q = omega_averaged_coincidence(
            &pair,
            u,
            u,
            DetectorModel::IDEAL,
            AveragingMethod::Quadrature { nodes: 4 },
        )
        .unwrap();
        assert_eq!(q.value, 0.0);
        let k = u_kernel_mc(&pair, u, -u, 100, crate::SeedStream::new(1)).unwrap();
        assert_eq!((k.value, k.std_error), (1.0, 0.0));
        assert_eq!(coincidence_from_kernel(0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn method_parameter_errors() {
        let pair = BeamPair::anti(1.0, BlochVector::Z);
        let u = BlochVector::Z;
        let mc = AveragingMethod::MonteCarlo {
            samples: 0,
            stream: crate::SeedStream::new(1),
        };
        assert!(matches!(
            omega_averaged_coincidence(&pair, u, u, DetectorModel::IDEAL, mc),
            Err(crate::Error::Config(_))
        ));
        let q = AveragingMethod::Quadrature { nodes: 0 };
        assert!(omega_averaged_coincidence(&pair, u, u, DetectorModel::IDEAL, q).is_err());
        assert!(u_kernel_mc(&pair, u, u, 0, crate::SeedStream::new(1)).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let rule = HaarQuadrature::new(HaarQuadrature::DEFAULT_NODES).unwrap();
        for s in [0.0025, 1.0, 5.0] {
            for k in 0..=6 {
                let alpha = PI * k as f64 / 6.0;
                let u_a = BlochVector::Z;
                let u_b = BlochVector::from_spherical(alpha, 0.4);
                let pair = BeamPair::anti(s, BlochVector::new(0.3, 0.1, -0.2));
                let p = ensemble_coincidence(
                    &WeightedEnsemble::single(pair),
                    u_a,
                    u_b,
                    DetectorModel::IDEAL,
                    &rule,
                )
                .unwrap();
                let q = coincidence_closed_anti(s, alpha).unwrap();
                assert!(
                    (p - q).abs() <= 1e-10 * q.max(1e-6),
                    "s={s} α={alpha}: {p} vs {q}"
                );
                let u = u_kernel_quadrature(&pair, u_a, u_b, &rule).unwrap();
                assert!((coincidence_from_kernel(s, s, u) - q).abs() < 1e-12);
            }
        }
    }
}
