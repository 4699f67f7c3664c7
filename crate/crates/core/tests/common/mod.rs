//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use cmr::geometry::TriangleMesh;
use cmr::spiral::{Affine, SpiralIndex};
use cmr::Vec3;
use nalgebra::{DMatrix, Rotation3};
use rand::seq::SliceRandom;
use rand::Rng;

/// Hop distance from `v` to every vertex (`usize::MAX` if unreachable),
/// from an edge set rebuilt directly from the faces.
pub fn bfs_distances(mesh: &TriangleMesh, v: usize) -> Vec<usize> {
    let n = mesh.vertex_count();
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for f in mesh.faces() {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            edges[a].insert(b);
            edges[b].insert(a);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut q = VecDeque::from([v]);
    while let Some(u) = q.pop_front() {
        for &w in &edges[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

/// Grid triangulation with random diagonals, jitter and vertex relabeling.
pub fn random_triangulation(rng: &mut impl Rng, max_vertices: usize) -> TriangleMesh {
    let nx = rng.random_range(3..=20);
    let ny = rng.random_range(3..=(max_vertices / nx).clamp(3, 25));
    let n = nx * ny;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut vertices = vec![Vec3::zeros(); n];
    for j in 0..ny {
        for i in 0..nx {
            vertices[perm[j * nx + i]] = Vec3::new(
                i as f64 + rng.random_range(-0.3..0.3),
                j as f64 + rng.random_range(-0.3..0.3),
                rng.random_range(-0.2..0.2),
            );
        }
    }
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let [a, b, c, d] = [j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1].map(|k| perm[k]);
            if rng.random_bool(0.5) {
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            } else {
                faces.push([a, b, c]);
                faces.push([b, d, c]);
            }
        }
    }
    TriangleMesh::new(vertices, faces).unwrap()
}

/// Spiral affine map by explicit loops over vertices, sequence positions
/// and channels.
pub fn gather_matmul(features: &DMatrix<f64>, index: &SpiralIndex, prefix: usize, a: &Affine) -> DMatrix<f64> {
    let (m, c) = features.shape();
    let out = a.weight.nrows();
    let mut y = DMatrix::zeros(m, out);
    for v in 0..m {
        let seq = &index.sequence(v)[..prefix];
        let mut x = vec![0.0; prefix * c];
        for (p, &u) in seq.iter().enumerate() {
            for ch in 0..c {
                x[p * c + ch] = features[(u, ch)];
            }
        }
        for o in 0..out {
            let mut acc = a.bias[o];
            for (k, xv) in x.iter().enumerate() {
                acc += a.weight[(o, k)] * xv;
            }
            y[(v, o)] = acc;
        }
    }
    y
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Sum of squared residuals after the best similarity with rotation `r`
/// (scale and translation in closed form).
pub fn similarity_residual(pred: &[Vec3], gt: &[Vec3], r: &Rotation3<f64>) -> f64 {
    let n = pred.len() as f64;
    let mp: Vec3 = pred.iter().sum::<Vec3>() / n;
    let mg: Vec3 = gt.iter().sum::<Vec3>() / n;
    let pc: Vec<Vec3> = pred.iter().map(|p| r * (p - mp)).collect();
    let gc: Vec<Vec3> = gt.iter().map(|g| g - mg).collect();
    let pp: f64 = pc.iter().map(|p| p.norm_squared()).sum();
    let gg: f64 = gc.iter().map(|g| g.norm_squared()).sum();
    let pg: f64 = pc.iter().zip(&gc).map(|(p, g)| p.dot(g)).sum();
    let s = (pg / pp).max(0.0);
    gg - 2.0 * s * pg + s * s * pp
}

/// Grid search over rotation vectors followed by pattern-search refinement
/// from the best few grid cells. Returns the smallest residual found.
pub fn rotation_grid_oracle(pred: &[Vec3], gt: &[Vec3]) -> f64 {
    let steps = 16;
    let pi = std::f64::consts::PI;
    let mut cells: Vec<(f64, Vec3)> = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let w = Vec3::new(i as f64, j as f64, k as f64) * (2.0 * pi / steps as f64) - Vec3::repeat(pi);
                if w.norm() <= pi + 1e-9 {
                    cells.push((similarity_residual(pred, gt, &Rotation3::new(w)), w));
                }
            }
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for &(mut e, mut w) in cells.iter().take(8) {
        let mut h = 2.0 * pi / steps as f64;
        while h > 1e-10 {
            let mut improved = false;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut cand = w;
                    cand[axis] += sign * h;
                    let ec = similarity_residual(pred, gt, &Rotation3::new(cand));
                    if ec < e {
                        e = ec;
                        w = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.min(e);
    }
    best
}
