//! Meshes, cameras, joint regression, projection and Procrustes alignment.

mod camera;
pub mod mesh;
mod procrustes;
mod regressor;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use camera::{project_points, CameraIntrinsics, MIN_DEPTH};
pub use mesh::TriangleMesh;
pub use procrustes::{procrustes_align, Similarity};
pub(crate) use procrustes::sum_squared_distance;
pub use regressor::{regress_joints, JointRegressor};

use crate::error::{Error, Result};
use crate::{Vec2, Vec3};

/// Default joint count for hand models (MANO convention).
pub const HAND_JOINTS: usize = 21;
/// Default joint count for body models (SMPL convention).
pub const BODY_JOINTS: usize = 24;

/// 2D joint landmarks in pixels with optional per-point confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmarks2D {
    pub points: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<Vec<f64>>,
}

impl Landmarks2D {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        let lm = Self {
            points,
            confidence: None,
        };
        lm.validate()?;
        Ok(lm)
    }

    pub fn with_confidence(points: Vec<Vec2>, confidence: Vec<f64>) -> Result<Self> {
        let lm = Self {
            points,
            confidence: Some(confidence),
        };
        lm.validate()?;
        Ok(lm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Config("landmark coordinates must be finite".into()));
        }
        if let Some(c) = &self.confidence {
            if c.len() != self.points.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} confidences for {} landmarks",
                    c.len(),
                    self.points.len()
                )));
            }
            if c.iter().any(|w| !(0.0..=1.0).contains(w)) {
                return Err(Error::Config("landmark confidence must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Confidence of point `i` (1 when none were given).
    pub fn weight(&self, i: usize) -> f64 {
        self.confidence.as_ref().map_or(1.0, |c| c[i])
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lm: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        lm.validate()?;
        Ok(lm)
    }
}

/// Camera-space root position in meters; always in front of the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct RootTranslation(Vec3);

impl RootTranslation {
    pub fn new(t: Vec3) -> Result<Self> {
        if !(t.z > 0.0) || !t.iter().all(|c| c.is_finite()) {
            return Err(Error::NonPositiveDepth { index: 0, z: t.z });
        }
        Ok(Self(t))
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }
}

impl TryFrom<Vec3> for RootTranslation {
    type Error = Error;

    fn try_from(t: Vec3) -> Result<Self> {
        Self::new(t)
    }
}

impl From<RootTranslation> for Vec3 {
    fn from(t: RootTranslation) -> Vec3 {
        t.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn landmarks_json_schema() {
        let lm: Landmarks2D =
            serde_json::from_str(r#"{"points": [[1.0, 2.0], [3.5, 4.0]], "confidence": [1.0, 0.5]}"#)
                .unwrap();
        assert_eq!(lm.points[1], Vec2::new(3.5, 4.0));
        assert_eq!(lm.weight(1), 0.5);
        let bare: Landmarks2D = serde_json::from_str(r#"{"points": [[1, 2]]}"#).unwrap();
        assert_eq!(bare.weight(0), 1.0);
        assert!(Landmarks2D::with_confidence(vec![Vec2::zeros()], vec![]).is_err());
        assert!(Landmarks2D::new(vec![Vec2::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn root_must_be_in_front() {
        assert!(RootTranslation::new(Vec3::new(0.0, 0.0, 0.0)).is_err());
        assert!(serde_json::from_str::<RootTranslation>("[0, 0, -1]").is_err());
        let t: RootTranslation = serde_json::from_str("[0.1, 0, 0.5]").unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "[0.1,0.0,0.5]");
    }
}
