use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SpiralIndex;
use crate::error::{Error, Result};

/// Per-vertex feature rows (M vertices x C channels).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFeatures(DMatrix<f64>);

impl VertexFeatures {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::ShapeMismatch("vertex features must be finite".into()));
        }
        Ok(Self(data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::ShapeMismatch("ragged feature rows".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
    }

    pub fn vertex_count(&self) -> usize {
        self.0.nrows()
    }

    pub fn channels(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// `y = W x + b` with W of shape (out x in).
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Affine {
    pub fn new(weight: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if weight.nrows() != bias.len() {
            return Err(Error::ShapeMismatch(format!(
                "weight has {} rows but bias has {} entries",
                weight.nrows(),
                bias.len()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(out: usize, input: usize) -> Self {
        Self {
            weight: DMatrix::zeros(out, input),
            bias: DVector::zeros(out),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.weight.nrows()
    }

    pub fn from_bundle(bundle: &TensorBundle, weight: &str, bias: &str) -> Result<Self> {
        let w = bundle.matrix(weight)?;
        let b = bundle.vector(bias)?;
        Self::new(w, b)
    }
}

/// Applies `affine` to the flattened features of the first `prefix` entries
/// of every spiral sequence.
fn spiral_affine(features: &VertexFeatures, index: &SpiralIndex, prefix: usize, affine: &Affine) -> Result<DMatrix<f64>> {
    let m = features.vertex_count();
    let c = features.channels();
    if m != index.vertex_count() {
        return Err(Error::ShapeMismatch(format!(
            "{m} feature rows for a spiral index over {} vertices",
            index.vertex_count()
        )));
    }
    if affine.weight.ncols() != prefix * c {
        return Err(Error::ShapeMismatch(format!(
            "weight expects {} inputs, spiral prefix of {prefix} x {c} channels gives {}",
            affine.weight.ncols(),
            prefix * c
        )));
    }
    let f = features.matrix();
    let gathered = DMatrix::from_fn(m, prefix * c, |v, col| {
        let u = index.sequence(v)[col / c];
        f[(u, col % c)]
    });
    let mut out = gathered * affine.weight.transpose();
    for mut row in out.row_iter_mut() {
        row += affine.bias.transpose();
    }
    Ok(out)
}

/// SpiralConv++: affine map over the full spiral sequence of every vertex.
pub fn spiralconv_forward(features: &VertexFeatures, index: &SpiralIndex, weights: &Affine) -> Result<VertexFeatures> {
    spiral_affine(features, index, index.length(), weights).map(VertexFeatures)
}

/// Four affine branches of the Inception Spiral Module. Branch `i` reads the
/// i-disk prefix; branch 0 is as wide as branches 1..3 together.
#[derive(Debug, Clone, PartialEq)]
pub struct IsmWeights {
    branches: [Affine; 4],
}

impl IsmWeights {
    pub fn new(branches: [Affine; 4]) -> Result<Self> {
        let concat: usize = branches[1..].iter().map(Affine::out_channels).sum();
        if branches[0].out_channels() != concat {
            return Err(Error::BranchChannelMismatch {
                o0: branches[0].out_channels(),
                concat,
            });
        }
        Ok(Self { branches })
    }

    pub fn branch(&self, i: usize) -> &Affine {
        &self.branches[i]
    }

    pub fn from_bundle(bundle: &TensorBundle) -> Result<Self> {
        let b = |i: usize| Affine::from_bundle(bundle, &format!("w{i}"), &format!("b{i}"));
        Self::new([b(0)?, b(1)?, b(2)?, b(3)?])
    }

    pub fn to_bundle(&self) -> TensorBundle {
        let mut bundle = TensorBundle::default();
        for (i, a) in self.branches.iter().enumerate() {
            bundle.insert_matrix(&format!("w{i}"), &a.weight);
            bundle.insert_vector(&format!("b{i}"), &a.bias);
        }
        bundle
    }
}

/// `ISM(v) = o0(v) + [o1(v), o2(v), o3(v)]` with `o_i` an affine map over
/// the i-disk prefix of the spiral.
pub fn ism_forward(features: &VertexFeatures, index: &SpiralIndex, weights: &IsmWeights) -> Result<VertexFeatures> {
    if index.max_ring() < 3 {
        return Err(Error::ShapeMismatch(format!(
            "ISM needs rings 0..3, the index covers 0..{}",
            index.max_ring()
        )));
    }
    let outs: Vec<DMatrix<f64>> = (0..4)
        .map(|i| spiral_affine(features, index, index.disk_len(i), weights.branch(i)))
        .collect::<Result<_>>()?;
    let mut result = outs[0].clone();
    let mut col = 0;
    for o in &outs[1..] {
        let w = o.ncols();
        let mut block = result.columns_mut(col, w);
        block += o;
        col += w;
    }
    Ok(VertexFeatures(result))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    dtype: String,
    blob: PathBuf,
    tensors: Vec<TensorEntry>,
}

/// Named row-major tensors stored as a JSON manifest plus a little-endian
/// float32 blob. Offsets in the manifest count elements, not bytes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorBundle {
    tensors: IndexMap<String, (Vec<usize>, Vec<f32>)>,
}

impl TensorBundle {
    pub fn insert(&mut self, name: &str, shape: Vec<usize>, data: Vec<f32>) -> Result<()> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor '{name}' has shape {shape:?} but {} elements",
                data.len()
            )));
        }
        self.tensors.insert(name.to_string(), (shape, data));
        Ok(())
    }

    pub fn insert_matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)] as f32))
            .collect();
        self.tensors
            .insert(name.to_string(), (vec![m.nrows(), m.ncols()], data));
    }

    pub fn insert_vector(&mut self, name: &str, v: &DVector<f64>) {
        self.tensors.insert(
            name.to_string(),
            (vec![v.len()], v.iter().map(|&x| x as f32).collect()),
        );
    }

    fn get(&self, name: &str) -> Result<&(Vec<usize>, Vec<f32>)> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::ShapeMismatch(format!("tensor '{name}' missing from bundle")))
    }

    pub fn matrix(&self, name: &str) -> Result<DMatrix<f64>> {
        let (shape, data) = self.get(name)?;
        let [r, c] = shape.as_slice() else {
            return Err(Error::ShapeMismatch(format!("tensor '{name}' is not 2-D: {shape:?}")));
        };
        Ok(DMatrix::from_row_iterator(*r, *c, data.iter().map(|&x| x as f64)))
    }

    pub fn vector(&self, name: &str) -> Result<DVector<f64>> {
        let (shape, data) = self.get(name)?;
        if shape.len() != 1 {
            return Err(Error::ShapeMismatch(format!("tensor '{name}' is not 1-D: {shape:?}")));
        }
        Ok(DVector::from_iterator(data.len(), data.iter().map(|&x| x as f64)))
    }

    /// Writes `<manifest>` and a blob next to it named after the manifest stem.
    pub fn save(&self, manifest: &Path) -> Result<()> {
        let stem = manifest
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "weights".into());
        let blob_name = PathBuf::from(format!("{stem}.bin"));
        let mut blob = Vec::new();
        let mut entries = Vec::new();
        let mut offset = 0;
        for (name, (shape, data)) in &self.tensors {
            entries.push(TensorEntry {
                name: name.clone(),
                shape: shape.clone(),
                offset,
            });
            offset += data.len();
            blob.extend(data.iter().flat_map(|x| x.to_le_bytes()));
        }
        let dir = manifest.parent().unwrap_or(Path::new(""));
        crate::io::write_atomic(&dir.join(&blob_name), &blob)?;
        crate::io::write_json(
            manifest,
            &Manifest {
                dtype: "float32".into(),
                blob: blob_name,
                tensors: entries,
            },
        )
    }

    pub fn load(manifest: &Path) -> Result<Self> {
        let m: Manifest = crate::io::read_json(manifest)?;
        if m.dtype != "float32" {
            return Err(Error::parse(manifest, format!("unsupported dtype '{}'", m.dtype)));
        }
        let blob_path = manifest.parent().unwrap_or(Path::new("")).join(&m.blob);
        let bytes = std::fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
        if bytes.len() % 4 != 0 {
            return Err(Error::parse(&blob_path, "blob size is not a multiple of 4"));
        }
        let floats: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        let mut bundle = TensorBundle::default();
        for t in m.tensors {
            let len: usize = t.shape.iter().product();
            let data = floats
                .get(t.offset..t.offset + len)
                .ok_or_else(|| Error::parse(&blob_path, format!("tensor '{}' runs past the blob", t.name)))?;
            bundle.insert(&t.name, t.shape, data.to_vec())?;
        }
        Ok(bundle)
    }
}
