use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quaternion `w + xi + yj + zk`, serialized as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quat {
    fn from(a: [f64; 4]) -> Self {
        Quat { w: a[0], x: a[1], y: a[2], z: a[3] }
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        [q.w, q.x, q.y, q.z]
    }
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = (0.5 * angle).sin_cos();
        let k = if n > 0.0 { s / n } else { 0.0 };
        Quat { w: c, x: axis[0] * k, y: axis[1] * k, z: axis[2] * k }
    }

    pub fn to_array(self) -> [f64; 4] {
        self.into()
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn neg(self) -> Quat {
        Quat { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn mul(self, r: Quat) -> Quat {
        let l = self;
        Quat {
            w: l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            x: l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            y: l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            z: l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        }
    }

    /// Row-major rotation matrix of a unit quaternion.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let Quat { w, x, y, z } = *self;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.to_matrix();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Upper-hemisphere test: `w > 0`, or `w = 0` with the first nonzero of
    /// `(x, y, z)` positive.
    pub fn is_canonical(&self) -> bool {
        if self.w > 0.0 {
            return true;
        }
        if self.w < 0.0 {
            return false;
        }
        [self.x, self.y, self.z].into_iter().find(|c| *c != 0.0).is_some_and(|c| c > 0.0)
    }

    /// Unit quaternion in the upper hemisphere representing the same rotation.
    pub fn canonicalize(self) -> Result<Quat> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroQuaternion);
        }
        let q = if n == 1.0 {
            self
        } else {
            Quat { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
        };
        Ok(if q.is_canonical() { q } else { q.neg() })
    }
}
