//! Generalized Bloch vectors.
//!
//! Axis convention used throughout the crate:
//!
//! | axis | polarization            | Stokes |
//! |------|-------------------------|--------|
//! | z    | horizontal / vertical   | S1     |
//! | x    | +45° / −45° diagonal    | S2     |
//! | y    | right / left circular   | S3     |
//!
//! The length of a generalized Bloch vector is the normalized beam intensity
//! (mean photon number per pulse), so a "unit" vector doubles as a
//! measurement setting.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tolerance on the norm of a vector used as a measurement setting.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    /// Diagonal +45°.
    pub const X: Self = Self::new(1.0, 0.0, 0.0);
    /// Right circular.
    pub const Y: Self = Self::new(0.0, 1.0, 0.0);
    /// Horizontal.
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Unit vector with polar angle `theta` from +z and azimuth `phi` from +x.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(st * cp, st * sp, ct)
    }

    /// Builds a vector from standard Stokes components (S1, S2, S3).
    pub fn from_stokes(s1: f64, s2: f64, s3: f64) -> Self {
        Self::new(s2, s3, s1)
    }

    /// Standard Stokes components (S1, S2, S3).
    pub fn to_stokes(self) -> [f64; 3] {
        [self.z, self.x, self.y]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.x, k * self.y, k * self.z)
    }

    /// Direction of the vector, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }

    /// Validates `self` as a measurement setting.
    pub fn require_unit(self, what: &str) -> Result<Self> {
        if self.is_unit() {
            Ok(self)
        } else {
            Err(domain(format!(
                "{what} must be a unit Bloch vector, got norm {}",
                self.norm()
            )))
        }
    }

    /// Angle between two vectors in [0, π].
    pub fn angle_to(self, other: Self) -> f64 {
        // atan2 form stays accurate near 0 and π.
        self.cross(other).norm().atan2(self.dot(other))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        (self - other)
            .to_array()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Vector3<f64>> for BlochVector {
    fn from(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

impl From<BlochVector> for Vector3<f64> {
    fn from(v: BlochVector) -> Self {
        Vector3::new(v.x, v.y, v.z)
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<BlochVector> for f64 {
    type Output = BlochVector;
    fn mul(self, v: BlochVector) -> BlochVector {
        v.scale(self)
    }
}
