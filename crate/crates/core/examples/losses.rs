//! Loss terms between a perturbed mesh and its reference.

use cmr::geometry::mesh::icosphere;
use cmr::geometry::JointRegressor;
use cmr::losses::{loss_bce, loss_edge, loss_mesh, loss_norm, loss_pose3d, loss_total, LossTerms, LossWeights};
use cmr::Vec3;

fn main() -> cmr::Result<()> {
    let gt = icosphere(2);
    let pred = gt.with_vertices(
        gt.vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| p * 1.02 + Vec3::new(0.001 * (i % 3) as f64, 0.0, -0.002))
            .collect(),
    )?;
    let j = JointRegressor::selector(gt.vertex_count(), &[0, 5, 10, 20])?;
    let gt_joints = j.regress(gt.vertices())?;

    let sil_gt: Vec<f64> = (0..256).map(|i| ((i / 16 + i % 16) % 5 == 0) as u8 as f64).collect();
    let sil_pred: Vec<f64> = sil_gt.iter().map(|g| 0.1 + 0.8 * g).collect();

    let terms = LossTerms {
        mesh: loss_mesh(pred.vertices(), gt.vertices())?,
        pose3d: loss_pose3d(pred.vertices(), &j, &gt_joints)?,
        pose2d: 0.0,
        sil: loss_bce(&sil_pred, &sil_gt)?,
        norm: loss_norm(&pred, &gt.face_normals())?,
        edge: loss_edge(&pred, &gt)?,
    };
    println!("{}", serde_json::to_string_pretty(&terms)?);
    println!("total {:.6}", loss_total(&terms, &LossWeights::default())?);
    Ok(())
}
