//! Pose and mesh error metrics. Inputs are in meters, outputs in millimeters.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{procrustes_align, sum_squared_distance};
use crate::Vec3;

const MM: f64 = 1000.0;

fn check_shapes(pred: &[Vec3], gt: &[Vec3]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!("{} predicted vs {} reference points", pred.len(), gt.len())));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn mean_distance(pred: &[Vec3], gt: &[Vec3]) -> f64 {
    pred.iter().zip(gt).map(|(p, g)| (p - g).norm()).sum::<f64>() / pred.len() as f64 * MM
}

/// Per-point distances in millimeters.
pub fn point_errors(pred: &[Vec3], gt: &[Vec3]) -> Result<Vec<f64>> {
    check_shapes(pred, gt)?;
    Ok(pred.iter().zip(gt).map(|(p, g)| (p - g).norm() * MM).collect())
}

fn root_relative(points: &[Vec3], root: usize) -> Vec<Vec3> {
    let r = points[root];
    points.iter().map(|p| p - r).collect()
}

/// Root-relative mean per-point error. Also serves as MPVPE when the root
/// index names a vertex.
pub fn mpjpe(pred: &[Vec3], gt: &[Vec3], root_index: usize) -> Result<f64> {
    check_shapes(pred, gt)?;
    if root_index >= pred.len() {
        return Err(Error::ShapeMismatch(format!("root {root_index} out of {} points", pred.len())));
    }
    Ok(mean_distance(&root_relative(pred, root_index), &root_relative(gt, root_index)))
}

/// Mean per-point error after similarity (Procrustes) alignment.
pub fn pa_mpjpe(pred: &[Vec3], gt: &[Vec3]) -> Result<f64> {
    check_shapes(pred, gt)?;
    let (aligned, _) = procrustes_align(pred, gt)?;
    Ok(mean_distance(&aligned, gt))
}

/// Sum of squared distances after Procrustes alignment (square meters).
pub fn pa_sum_squares(pred: &[Vec3], gt: &[Vec3]) -> Result<f64> {
    check_shapes(pred, gt)?;
    let (aligned, _) = procrustes_align(pred, gt)?;
    Ok(sum_squared_distance(&aligned, gt))
}

/// Sum of squared distances after subtracting the respective roots.
pub fn root_sum_squares(pred: &[Vec3], gt: &[Vec3], root_index: usize) -> Result<f64> {
    check_shapes(pred, gt)?;
    Ok(sum_squared_distance(&root_relative(pred, root_index), &root_relative(gt, root_index)))
}

/// Camera-space mean error, no alignment of any kind.
pub fn cs_mpjpe(pred_cs: &[Vec3], gt_cs: &[Vec3]) -> Result<f64> {
    check_shapes(pred_cs, gt_cs)?;
    Ok(mean_distance(pred_cs, gt_cs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PckCurve {
    /// Millimeters, ascending.
    pub thresholds: Vec<f64>,
    /// Fraction of errors at or below each threshold.
    pub values: Vec<f64>,
}

/// 100 thresholds evenly spaced over [0, 50] mm.
pub fn default_thresholds() -> Vec<f64> {
    thresholds(0.0, 50.0, 100)
}

pub fn thresholds(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// PCK curve and its area, normalized by the threshold range.
pub fn pck_auc(errors: &[f64], thresholds: &[f64]) -> Result<(PckCurve, f64)> {
    if errors.is_empty() || thresholds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("PCK thresholds must be finite and strictly ascending".into()));
    }
    let mut sorted: Vec<f64> = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let values: Vec<f64> = thresholds
        .iter()
        .map(|t| sorted.partition_point(|e| e <= t) as f64 / n)
        .collect();
    let range = thresholds[thresholds.len() - 1] - thresholds[0];
    let auc = if range > 0.0 {
        thresholds
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| (t[1] - t[0]) * (v[0] + v[1]) / 2.0)
            .sum::<f64>()
            / range
    } else {
        values[0]
    };
    Ok((
        PckCurve {
            thresholds: thresholds.to_vec(),
            values,
        },
        auc,
    ))
}

/// Metrics of one sample, keyed by metric name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub sample_id: String,
    pub metrics: IndexMap<String, f64>,
}

/// Joint and optional vertex sets of one sample, camera space, meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    #[serde(default)]
    pub id: Option<String>,
    pub joints: Vec<Vec3>,
    #[serde(default)]
    pub vertices: Option<Vec<Vec3>>,
}

/// Computes the standard metric set for one prediction/reference pair.
pub fn evaluate_sample(id: &str, pred: &PoseSample, gt: &PoseSample, root_index: usize) -> Result<SampleMetrics> {
    let mut m = IndexMap::new();
    m.insert("mpjpe".to_string(), mpjpe(&pred.joints, &gt.joints, root_index)?);
    m.insert("pa_mpjpe".to_string(), pa_mpjpe(&pred.joints, &gt.joints)?);
    m.insert("cs_mpjpe".to_string(), cs_mpjpe(&pred.joints, &gt.joints)?);
    if let (Some(pv), Some(gv)) = (&pred.vertices, &gt.vertices) {
        // root-relative by the joint root, shared by joints and vertices
        let (pr, gr) = (pred.joints[root_index], gt.joints[root_index]);
        let prv: Vec<Vec3> = pv.iter().map(|p| p - pr).collect();
        let grv: Vec<Vec3> = gv.iter().map(|p| p - gr).collect();
        m.insert("mpvpe".to_string(), cs_mpjpe(&prv, &grv)?);
        m.insert("pa_mpvpe".to_string(), pa_mpjpe(pv, gv)?);
        m.insert("cs_mpvpe".to_string(), cs_mpjpe(pv, gv)?);
    }
    Ok(SampleMetrics {
        sample_id: id.to_string(),
        metrics: m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: Vec<SampleMetrics>,
    /// Mean of each metric over samples.
    pub mean: IndexMap<String, f64>,
    pub pck: PckCurve,
    pub auc: f64,
}

/// Aggregates per-sample metrics; PCK is over root-relative joint errors of
/// every sample.
pub fn build_report(pairs: &[(String, PoseSample, PoseSample)], root_index: usize, thresholds: &[f64]) -> Result<MetricsReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut samples = Vec::with_capacity(pairs.len());
    let mut errors = Vec::new();
    for (id, pred, gt) in pairs {
        samples.push(evaluate_sample(id, pred, gt, root_index)?);
        errors.extend(point_errors(
            &root_relative(&pred.joints, root_index),
            &root_relative(&gt.joints, root_index),
        )?);
    }
    let mut mean: IndexMap<String, f64> = IndexMap::new();
    for s in &samples {
        for (k, v) in &s.metrics {
            *mean.entry(k.clone()).or_default() += v / samples.len() as f64;
        }
    }
    let (pck, auc) = pck_auc(&errors, thresholds)?;
    Ok(MetricsReport { samples, mean, pck, auc })
}

impl MetricsReport {
    /// Rows of `sample_id,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,metric,value\n");
        for s in &self.samples {
            for (k, v) in &s.metrics {
                let _ = writeln!(out, "{},{k},{v}", s.sample_id);
            }
        }
        for (k, v) in &self.mean {
            let _ = writeln!(out, "mean,{k},{v}");
        }
        let _ = writeln!(out, "all,auc,{}", self.auc);
        out
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        crate::io::write_atomic(&dir.join("metrics.csv"), self.to_csv().as_bytes())?;
        crate::io::write_json(&dir.join("metrics.json"), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> Vec<Vec3> {
        (0..21)
            .map(|i| {
                let f = i as f64;
                Vec3::new((f * 0.7).sin() * 0.05, (f * 1.3).cos() * 0.04, f * 0.002)
            })
            .collect()
    }

    #[test]
    fn root_subtraction_cancels_offset() {
        let gt = hand();
        let off = Vec3::new(0.0489, 0.0, 0.0);
        let pred: Vec<Vec3> = gt.iter().map(|p| p + off).collect();
        assert!(mpjpe(&pred, &gt, 0).unwrap() < 1e-9);
        assert!((cs_mpjpe(&pred, &gt).unwrap() - 48.9).abs() < 1e-9);
    }

    #[test]
    fn one_joint_off() {
        let gt = hand();
        let mut pred = gt.clone();
        pred[7].y += 0.021;
        assert!((mpjpe(&pred, &gt, 0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pa_invariance_and_reflection() {
        let gt = hand();
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 1.1);
        let pred: Vec<Vec3> = gt.iter().map(|p| r * p * 1.7 + Vec3::new(0.1, 0.2, 0.3)).collect();
        assert!(pa_mpjpe(&pred, &gt).unwrap() < 1e-6);
        let mirrored: Vec<Vec3> = gt.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        assert!(pa_mpjpe(&mirrored, &gt).unwrap() > 1.0);
    }

    #[test]
    fn pck_extremes() {
        let t = default_thresholds();
        assert_eq!(t.len(), 100);
        let (c, auc) = pck_auc(&[0.0; 10], &t).unwrap();
        assert!(c.values.iter().all(|&v| v == 1.0));
        assert_eq!(auc, 1.0);
        let (_, auc) = pck_auc(&[60.0; 10], &t).unwrap();
        assert_eq!(auc, 0.0);
        assert!(matches!(pck_auc(&[], &t), Err(Error::EmptyInput)));
        assert!(pck_auc(&[1.0], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn report_csv() {
        let gt = PoseSample {
            id: None,
            joints: hand(),
            vertices: None,
        };
        let rep = build_report(&[("a".into(), gt.clone(), gt)], 0, &default_thresholds()).unwrap();
        let csv = rep.to_csv();
        assert!(csv.starts_with("sample_id,metric,value\na,mpjpe,0\n"));
        assert_eq!(rep.auc, 1.0);
    }
}
