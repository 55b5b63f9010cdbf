//! Euler-angle kinematics relating the body frame `xyz` to the inertial
//! frame `XYZ`.
//!
//! The rotation uses the yaw-pitch-roll sequence `R = R_phi * R_theta * R_psi`
//! and maps inertial components into body components. Its transpose maps
//! body components back into the inertial frame.
//!
//! The simulator identifies Euler-angle rates with body angular rates
//! `(p, q, r)`. That is exact for planar motion and a near-hover
//! approximation otherwise.

use nalgebra::{Matrix3, Vector3};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Yaw, pitch and roll in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl EulerAngles {
    pub const fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.yaw.is_finite() && self.pitch.is_finite() && self.roll.is_finite()) {
            return Err(Error::NonFinite {
                what: "Euler angles",
            });
        }
        if self.pitch.abs() >= FRAC_PI_2 {
            return Err(Error::SingularPitch { pitch: self.pitch });
        }
        Ok(())
    }
}

/// A proper orthonormal 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Largest absolute entry of `R R^T - I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

/// Inertial-to-body rotation for the given angles.
pub fn rotation_matrix(angles: &EulerAngles) -> Result<RotationMatrix> {
    angles.validate()?;
    let (spsi, cpsi) = angles.yaw.sin_cos();
    let (sth, cth) = angles.pitch.sin_cos();
    let (sphi, cphi) = angles.roll.sin_cos();

    #[rustfmt::skip]
    let m = Matrix3::new(
        cpsi * cth,                       cth * spsi,                       -sth,
        cpsi * sth * sphi - cphi * spsi,  spsi * sth * sphi + cphi * cpsi,  cth * sphi,
        cpsi * cphi * sth + spsi * sphi,  cphi * spsi * sth - sphi * cpsi,  cth * cphi,
    );
    Ok(RotationMatrix(m))
}

/// Body-to-inertial rotation, i.e. the transpose.
pub fn inverse_rotation(r: &RotationMatrix) -> RotationMatrix {
    RotationMatrix(r.0.transpose())
}

/// Express a body-frame vector in inertial components.
pub fn body_to_inertial(v: &Vec3, angles: &EulerAngles) -> Result<Vec3> {
    let r = rotation_matrix(angles)?;
    Ok(inverse_rotation(&r).apply(v))
}

/// Express an inertial-frame vector in body components.
pub fn inertial_to_body(v: &Vec3, angles: &EulerAngles) -> Result<Vec3> {
    Ok(rotation_matrix(angles)?.apply(v))
}
