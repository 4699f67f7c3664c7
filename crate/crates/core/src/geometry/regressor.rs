use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::Vec3;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Sparse row-stochastic matrix mapping mesh vertices to joints.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRegressor {
    cols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct RegressorFile {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl JointRegressor {
    /// Builds the matrix from `(row, col, weight)` triplets. Duplicate
    /// triplets are summed.
    pub fn from_entries(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut data: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(r, c, w) in entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidRegressor(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidRegressor(format!(
                    "weight {w} at ({r}, {c}) must be finite and non-negative"
                )));
            }
            data[r].push((c, w));
        }
        for (r, row) in data.iter_mut().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            row.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 += next.1;
                    true
                } else {
                    false
                }
            });
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidRegressor(format!("row {r} sums to {sum}, expected 1")));
            }
        }
        Ok(Self { cols, rows: data })
    }

    /// Row `j` selects vertex `indices[j]`.
    pub fn selector(cols: usize, indices: &[usize]) -> Result<Self> {
        let entries: Vec<_> = indices.iter().enumerate().map(|(r, &c)| (r, c, 1.0)).collect();
        Self::from_entries(indices.len(), cols, &entries)
    }

    pub fn joint_count(&self) -> usize {
        self.rows.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[(usize, f64)] {
        &self.rows[j]
    }

    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, w)| (r, c, w)))
            .collect()
    }

    /// `J * points`, one coordinate at a time.
    pub fn regress(&self, points: &[Vec3]) -> Result<Vec<Vec3>> {
        if points.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "regressor has {} columns, got {} points",
                self.cols,
                points.len()
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, w)| points[c] * w).sum())
            .collect())
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let raw: RegressorFile =
            serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
        Self::from_entries(raw.rows, raw.cols, &raw.entries)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RegressorFile {
            rows: self.rows.len(),
            cols: self.cols,
            entries: self.entries(),
        })
        .expect("regressor serializes")
    }
}

/// Joints of `mesh` under regressor `j`.
pub fn regress_joints(mesh: &TriangleMesh, j: &JointRegressor) -> Result<Vec<Vec3>> {
    j.regress(mesh.vertices())
}
