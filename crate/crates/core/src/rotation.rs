//! Proper rotations of the Bloch sphere and Haar sampling on SO(3).

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bloch::BlochVector;
use crate::error::{domain, Result};

/// Entrywise tolerance for orthogonality and unit determinant.
pub const ROTATION_TOLERANCE: f64 = 1e-12;

/// Tolerance on the axis norm accepted by [`rotation_about`].
pub const AXIS_TOLERANCE: f64 = 1e-9;

/// An element of SO(3), acting on generalized Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix after checking orthogonality and det = 1.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let r = Self(m);
        let (orth, det) = r.invariant_errors();
        if orth > ROTATION_TOLERANCE || det > ROTATION_TOLERANCE {
            return Err(domain(format!(
                "not a proper rotation: |RᵀR − I|max = {orth:e}, |det − 1| = {det:e}"
            )));
        }
        Ok(r)
    }

    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Self(Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Z–Y–Z Euler rotation `Rz(alpha) · Ry(beta) · Rz(gamma)`.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        let (sg, cg) = gamma.sin_cos();
        Self(Matrix3::new(
            ca * cb * cg - sa * sg,
            -ca * cb * sg - sa * cg,
            ca * sb,
            sa * cb * cg + ca * sg,
            -sa * cb * sg + ca * cg,
            sa * sb,
            -sb * cg,
            sb * sg,
            cb,
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: BlochVector) -> BlochVector {
        (self.0 * Vector3::from(v)).into()
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0 * other.0)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `(max |RᵀR − I|, |det R − 1|)`.
    pub fn invariant_errors(&self) -> (f64, f64) {
        let orth = (self.0.transpose() * self.0 - Matrix3::identity()).amax();
        let det = (self.0.determinant() - 1.0).abs();
        (orth, det)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0).amax()
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl Mul<BlochVector> for &Rotation3 {
    type Output = BlochVector;
    fn mul(self, v: BlochVector) -> BlochVector {
        self.apply(v)
    }
}

/// Right-handed rotation by `angle` radians about a unit `axis`.
pub fn rotation_about(axis: BlochVector, angle: f64) -> Result<Rotation3> {
    let n = axis.norm();
    if (n - 1.0).abs() > AXIS_TOLERANCE {
        return Err(domain(format!("rotation axis must be unit, got norm {n}")));
    }
    // Renormalize so that the result is orthogonal to machine precision.
    let a = axis.scale(1.0 / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    Ok(Rotation3(Matrix3::new(
        c + a.x * a.x * t,
        a.x * a.y * t - a.z * s,
        a.x * a.z * t + a.y * s,
        a.y * a.x * t + a.z * s,
        c + a.y * a.y * t,
        a.y * a.z * t - a.x * s,
        a.z * a.x * t - a.y * s,
        a.z * a.y * t + a.x * s,
        c + a.z * a.z * t,
    )))
}

/// Draws a rotation from the normalized Haar measure.
///
/// Four independent standard normals give a uniformly distributed unit
/// quaternion; its rotation matrix is Haar-distributed on SO(3).
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3 {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        if w * w + x * x + y * y + z * z > 1e-300 {
            return Rotation3::from_quaternion(w, x, y, z);
        }
    }
}
