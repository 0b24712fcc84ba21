use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Orthonormal tangent frame `(t1, t2, normal)` centered at `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
    pub normal: Vec3,
}

impl LocalFrame {
    /// Gram–Schmidt on the global axis least aligned with `normal`.
    pub fn new(origin: Vec3, normal: Vec3) -> Result<Self> {
        let len = vec3::norm(normal);
        if !(len >= 1e-14) {
            return Err(Error::DegenerateNormal);
        }
        let m = vec3::scale(normal, 1.0 / len);
        let mut axis = 0;
        for i in 1..3 {
            if m[i].abs() < m[axis].abs() {
                axis = i;
            }
        }
        let mut seed = [0.0; 3];
        seed[axis] = 1.0;
        let t1 = vec3::normalize(vec3::sub(seed, vec3::scale(m, m[axis])));
        let t2 = vec3::cross(m, t1);
        Ok(LocalFrame { origin, t1, t2, normal: m })
    }

    /// Tangent-plane coordinates of `x`.
    pub fn to_uv(&self, x: Vec3) -> [f64; 2] {
        let d = vec3::sub(x, self.origin);
        [vec3::dot(d, self.t1), vec3::dot(d, self.t2)]
    }
}

pub fn build_frame(point: Vec3, normal: Vec3) -> Result<LocalFrame> {
    LocalFrame::new(point, normal)
}
