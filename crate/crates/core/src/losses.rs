//! Forward evaluation of the reconstruction loss terms and their weighted
//! total. No gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{JointRegressor, TriangleMesh};
use crate::Vec3;

/// Floor applied to log arguments in [`bce`].
pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub lambda_n: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_p: 10.0,
            lambda_s: 0.5,
            lambda_n: 0.1,
        }
    }
}

impl LossWeights {
    pub fn zeros() -> Self {
        Self {
            lambda_p: 0.0,
            lambda_s: 0.0,
            lambda_n: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.lambda_p, self.lambda_s, self.lambda_n].iter().all(|w| *w >= 0.0 && w.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("loss weights must be finite and non-negative".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

impl Reduction {
    fn apply(self, sum: f64, count: usize) -> f64 {
        match self {
            Reduction::Sum => sum,
            Reduction::Mean if count == 0 => 0.0,
            Reduction::Mean => sum / count as f64,
        }
    }
}

/// L1 distance between two point sets, over all coordinates.
pub fn l1(pred: &[Vec3], gt: &[Vec3], reduction: Reduction) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} points", pred.len(), gt.len())));
    }
    let s = pred.iter().zip(gt).map(|(p, g)| (p - g).abs().sum()).sum();
    Ok(reduction.apply(s, 3 * pred.len()))
}

/// `||V - V*||_1`, summed.
pub fn loss_mesh(pred: &[Vec3], gt: &[Vec3]) -> Result<f64> {
    l1(pred, gt, Reduction::Sum)
}

/// `||J V - J*||_1`, summed.
pub fn loss_pose3d(mesh: &[Vec3], j: &JointRegressor, gt_joints: &[Vec3]) -> Result<f64> {
    let joints = j
        .regress(mesh)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    l1(&joints, gt_joints, Reduction::Sum)
}

/// Binary cross-entropy averaged over pixels. Log arguments are floored at
/// `BCE_EPS`, so the value is finite for any `pred` in `[0, 1]`.
pub fn loss_bce(pred: &[f64], gt: &[f64]) -> Result<f64> {
    bce(pred, gt, Reduction::Mean)
}

pub fn bce(pred: &[f64], gt: &[f64], reduction: Reduction) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} pixels", pred.len(), gt.len())));
    }
    let s = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let mut v = 0.0;
            if g != 0.0 {
                v -= g * p.max(BCE_EPS).ln();
            }
            if g != 1.0 {
                v -= (1.0 - g) * (1.0 - p).max(BCE_EPS).ln();
            }
            v
        })
        .sum();
    Ok(reduction.apply(s, pred.len()))
}

/// `sum_k sum_{(i,j) in k} |unit(V_i - V_j) . n*_k|`
pub fn loss_norm(pred: &TriangleMesh, gt_normals: &[Vec3]) -> Result<f64> {
    if gt_normals.len() != pred.faces().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} normals for {} faces",
            gt_normals.len(),
            pred.faces().len()
        )));
    }
    let v = pred.vertices();
    let mut total = 0.0;
    for (f, n) in pred.faces().iter().zip(gt_normals) {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            let e = v[a] - v[b];
            let len = e.norm();
            if len == 0.0 {
                return Err(Error::ZeroLengthEdge(a, b));
            }
            total += (e / len).dot(n).abs();
        }
    }
    Ok(total)
}

/// `sum_k sum_{(i,j) in k} | |V_i - V_j| - |V*_i - V*_j| |`; both meshes must
/// share faces.
pub fn loss_edge(pred: &TriangleMesh, gt: &TriangleMesh) -> Result<f64> {
    if pred.faces() != gt.faces() || pred.vertex_count() != gt.vertex_count() {
        return Err(Error::ShapeMismatch("meshes do not share topology".into()));
    }
    let (p, g) = (pred.vertices(), gt.vertices());
    Ok(pred
        .faces()
        .iter()
        .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
        .map(|(a, b)| ((p[a] - p[b]).norm() - (g[a] - g[b]).norm()).abs())
        .sum())
}

/// Individual term values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    pub mesh: f64,
    pub pose3d: f64,
    pub pose2d: f64,
    pub sil: f64,
    pub norm: f64,
    pub edge: f64,
}

impl LossTerms {
    pub fn total(&self, weights: &LossWeights) -> Result<f64> {
        loss_total(self, weights)
    }
}

/// `L_mesh + L_pose3D + lp L_pose2D + ls L_sil + ln L_norm + L_edge`
pub fn loss_total(terms: &LossTerms, weights: &LossWeights) -> Result<f64> {
    weights.validate()?;
    let t = terms;
    if ![t.mesh, t.pose3d, t.pose2d, t.sil, t.norm, t.edge].iter().all(|x| x.is_finite()) {
        return Err(Error::Config("loss terms must be finite".into()));
    }
    Ok(t.mesh
        + t.pose3d
        + weights.lambda_p * t.pose2d
        + weights.lambda_s * t.sil
        + weights.lambda_n * t.norm
        + t.edge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{icosphere, tetrahedron};

    #[test]
    fn mesh_offset_spot_value() {
        let gt = vec![Vec3::new(0.1, 0.2, 0.3); 778];
        let pred: Vec<Vec3> = gt.iter().map(|p| p + Vec3::new(0.001, 0.0, 0.0)).collect();
        assert!((loss_mesh(&pred, &gt).unwrap() - 0.778).abs() < 1e-9);
        assert_eq!(loss_mesh(&gt, &gt).unwrap(), 0.0);
        assert!((l1(&pred, &gt, Reduction::Mean).unwrap() - 0.001 / 3.0).abs() < 1e-15);
        assert!(matches!(loss_mesh(&gt[..3], &gt), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn bce_values() {
        let gt = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(loss_bce(&gt, &gt).unwrap(), 0.0);
        assert!((loss_bce(&[0.5; 4], &gt).unwrap() - 2f64.ln()).abs() < 1e-12);
        let h = 0.3 * (1.0f64 / 0.3).ln() + 0.7 * (1.0f64 / 0.7).ln();
        assert!((loss_bce(&[0.3], &[0.3]).unwrap() - h).abs() < 1e-12);
        assert!(loss_bce(&[0.0], &[1.0]).unwrap().is_finite());
    }

    #[test]
    fn norm_and_edge() {
        let m = icosphere(1);
        assert!(loss_norm(&m, &m.face_normals()).unwrap() < 1e-10);
        assert_eq!(loss_edge(&m, &m).unwrap(), 0.0);
        let doubled = m.with_vertices(m.vertices().iter().map(|p| p * 2.0).collect()).unwrap();
        let total: f64 = m
            .faces()
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (m.vertices()[a] - m.vertices()[b]).norm())
            .sum();
        assert!((loss_edge(&doubled, &m).unwrap() - total).abs() < 1e-12);
        assert!(loss_edge(&m, &tetrahedron()).is_err());
    }

    #[test]
    fn tilted_edge_contributes_one() {
        let pred = TriangleMesh::new(
            vec![Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        // edges: (0,1) along z -> 1; (1,2) at 45 deg -> 1/sqrt2; (2,0) in plane -> 0
        let v = loss_norm(&pred, &[Vec3::z()]).unwrap();
        assert!((v - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn weighted_total() {
        let ones = LossTerms {
            mesh: 1.0,
            pose3d: 1.0,
            pose2d: 1.0,
            sil: 1.0,
            norm: 1.0,
            edge: 1.0,
        };
        assert!((loss_total(&ones, &LossWeights::default()).unwrap() - 13.6).abs() < 1e-12);
        assert_eq!(loss_total(&ones, &LossWeights::zeros()).unwrap(), 3.0);
        assert!(loss_total(&ones, &LossWeights { lambda_p: -1.0, ..Default::default() }).is_err());
    }
}
