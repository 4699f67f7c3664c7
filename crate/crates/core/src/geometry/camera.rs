use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Vec2, Vec3};

/// Points closer to the camera plane than this are rejected by [`project_points`].
pub const MIN_DEPTH: f64 = 1e-6;

/// Ideal pinhole intrinsics (no skew, no distortion). Camera frame is
/// OpenCV style: x right, y down, z forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntrinsics")]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Deserialize)]
struct RawIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
}

impl TryFrom<RawIntrinsics> for CameraIntrinsics {
    type Error = Error;

    fn try_from(r: RawIntrinsics) -> Result<Self> {
        Self::new(r.fx, r.fy, r.cx, r.cy)
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidIntrinsics("principal point must be finite".into()));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Projection without the depth check.
    #[inline]
    pub fn project(&self, p: &Vec3) -> Vec2 {
        Vec2::new(self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    /// Point at depth `z` that projects onto pixel `px`.
    pub fn back_project(&self, px: &Vec2, z: f64) -> Vec3 {
        Vec3::new((px.x - self.cx) / self.fx * z, (px.y - self.cy) / self.fy * z, z)
    }

    /// Jacobian of [`Self::project`] with respect to the 3D point, as two rows
    /// (d pixel-x, d pixel-y).
    #[inline]
    pub fn project_jacobian(&self, p: &Vec3) -> [Vec3; 2] {
        let iz = 1.0 / p.z;
        [
            Vec3::new(self.fx * iz, 0.0, -self.fx * p.x * iz * iz),
            Vec3::new(0.0, self.fy * iz, -self.fy * p.y * iz * iz),
        ]
    }
}

/// Pinhole projection of camera-space points to pixels.
pub fn project_points(points: &[Vec3], k: &CameraIntrinsics) -> Result<Vec<Vec2>> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if p.z <= MIN_DEPTH {
                Err(Error::NonPositiveDepth { index, z: p.z })
            } else {
                Ok(k.project(p))
            }
        })
        .collect()
}
