use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::Vec3;

/// `x -> scale * rotation * x + translation`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Similarity {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    #[inline]
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p * self.scale + self.translation
    }
}

/// Best similarity transform (proper rotation, uniform scale, translation)
/// taking `pred` onto `gt` in the least-squares sense.
///
/// Returns the transformed `pred` together with the transform.
pub fn procrustes_align(pred: &[Vec3], gt: &[Vec3]) -> Result<(Vec<Vec3>, Similarity)> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!(
            "procrustes needs equal cardinality, got {} and {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.len() < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "procrustes needs at least 3 points, got {}",
            pred.len()
        )));
    }
    let n = pred.len() as f64;
    let mu_p: Vec3 = pred.iter().sum::<Vec3>() / n;
    let mu_g: Vec3 = gt.iter().sum::<Vec3>() / n;

    let mut cov = Matrix3::zeros();
    let mut gt_scatter = Matrix3::zeros();
    let mut var_p = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        let pc = p - mu_p;
        let gc = g - mu_g;
        cov += gc * pc.transpose();
        gt_scatter += gc * gc.transpose();
        var_p += pc.norm_squared();
    }

    let gt_sv = gt_scatter.symmetric_eigenvalues();
    let mut ev: Vec<f64> = gt_sv.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[0] <= 0.0 || ev[1] <= ev[0] * 1e-20 {
        return Err(Error::DegenerateConfiguration(
            "ground-truth points are collinear or coincident".into(),
        ));
    }
    if var_p <= 0.0 {
        return Err(Error::DegenerateConfiguration(
            "predicted points are coincident".into(),
        ));
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut d = Matrix3::identity();
    // nalgebra sorts singular values in descending order, so the last
    // column carries the smallest one
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = u * d * v_t;
    let trace_sd: f64 = (0..3).map(|i| svd.singular_values[i] * d[(i, i)]).sum();
    let scale = trace_sd / var_p;
    let translation = mu_g - rotation * mu_p * scale;

    let tf = Similarity {
        scale,
        rotation,
        translation,
    };
    Ok((pred.iter().map(|p| tf.apply(p)).collect(), tf))
}

pub(crate) fn sum_squared_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum()
}
