use crate::error::{Error, Result};
use crate::tensor::{Mat3, Vec3};

/// Deformation measures at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub f: Mat3,
    pub j: f64,
    pub f_inv: Mat3,
    /// `F̄ = J^{-1/3} F`
    pub f_bar: Mat3,
    /// `b̄ = F̄ F̄ᵀ`
    pub b_bar: Mat3,
    /// Spatial electric field.
    pub e: Vec3,
}

impl KinematicState {
    pub fn with_field(mut self, e: Vec3) -> Self {
        self.e = e;
        self
    }

    /// Material electric field `E₀ = Fᵀ E`.
    pub fn material_field(&self) -> Vec3 {
        self.f.transpose() * self.e
    }
}

/// Kinematic state of `F` with a zero electric field.
pub fn kinematics(f: Mat3) -> Result<KinematicState> {
    let j = f.determinant();
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::Inverted { cell: 0, det: j });
    }
    let f_inv = f.try_inverse().ok_or(Error::SingularDeformation)?;
    let f_bar = f * j.powf(-1.0 / 3.0);
    Ok(KinematicState {
        f,
        j,
        f_inv,
        f_bar,
        b_bar: f_bar * f_bar.transpose(),
        e: Vec3::zeros(),
    })
}
