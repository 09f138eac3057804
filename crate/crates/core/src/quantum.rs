//! Werner-state predictions, including the singlet.
//!
//! Only the closed-form joint detection law `¼(1 + η u_a·u_b)` is needed;
//! no density matrices are built.

use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::{domain, Result};

/// Parameter η of the Werner family `¼(I⊗I + η Σ σᵢ⊗σᵢ)`.
///
/// Physical for −1 ≤ η ≤ 1/3, separable for |η| ≤ 1/3.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct WernerParameter(f64);

impl WernerParameter {
    pub const SINGLET: Self = Self(-1.0);
    pub const MAXIMALLY_MIXED: Self = Self(0.0);
    pub const MIN: f64 = -1.0;
    pub const MAX: f64 = 1.0 / 3.0;

    pub fn new(eta: f64) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(domain(format!(
                "Werner parameter {eta} outside the physical range [-1, 1/3]"
            )))
        }
    }

    pub fn eta(self) -> f64 {
        self.0
    }

    pub fn is_separable(self) -> bool {
        is_separable(self)
    }
}

/// Probability that photon a is found in `u_a` and photon b in `u_b`.
pub fn werner_coincidence(eta: WernerParameter, u_a: BlochVector, u_b: BlochVector) -> Result<f64> {
    let u_a = u_a.require_unit("u_a")?;
    let u_b = u_b.require_unit("u_b")?;
    Ok(0.25 * (1.0 + eta.0 * u_a.dot(u_b).clamp(-1.0, 1.0)))
}

/// Same law written against the angle α between the two settings.
pub fn werner_coincidence_at_angle(eta: WernerParameter, alpha: f64) -> f64 {
    0.25 * (1.0 + eta.0 * alpha.cos())
}

/// Visibility of the Werner correlations, `|η|`.
pub fn quantum_visibility(eta: WernerParameter) -> f64 {
    eta.0.abs()
}

pub fn is_separable(eta: WernerParameter) -> bool {
    eta.0.abs() <= 1.0 / 3.0
}
