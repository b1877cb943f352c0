use serde::{Deserialize, Serialize};

use crate::mesh::Point3;
use crate::smoothing::FiberFrame;
use crate::tensor::Vec3;

/// Transmural fiber rotation through the cube thickness along `z`.
///
/// The angle runs linearly from `+60°` at `z = 0` to `-60°` at `z = l`, measured
/// in the x-y plane from the +x axis. `sign = -1` mirrors the rotation sense.
/// The sheet direction is `e_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberRule {
    pub length: f64,
    pub sign: f64,
}

impl FiberRule {
    pub fn new(length: f64) -> Self {
        FiberRule { length, sign: 1.0 }
    }

    /// Fiber angle in degrees at height `z`.
    pub fn angle_deg(&self, z: f64) -> f64 {
        60.0 - 120.0 * z / self.length
    }

    pub fn frame(&self, x: &Point3) -> FiberFrame {
        let t = self.angle_deg(x.z).to_radians();
        let f0 = Vec3::new(t.cos(), self.sign * t.sin(), 0.0);
        let s0 = Vec3::z();
        FiberFrame {
            f0,
            s0,
            n0: f0.cross(&s0),
        }
    }
}

pub fn fiber_rule(x: &Point3, l: f64) -> FiberFrame {
    FiberRule::new(l).frame(x)
}
