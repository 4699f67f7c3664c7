//! Seeded synthetic scenes: a procedural 778-vertex hand, its joint
//! regressor, a camera, landmarks and a silhouette mask, with optional noise.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project_points, CameraIntrinsics, JointRegressor, Landmarks2D, TriangleMesh, HAND_JOINTS};
use crate::silhouette::{rasterize_triangles, SilhouetteMask};
use crate::{Vec2, Vec3};

/// Vertex count of [`random_hand`].
pub const HAND_VERTICES: usize = 778;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-coordinate Gaussian landmark noise, pixels.
    pub landmark_sigma: f64,
    /// Rigid shift of all landmarks by this many pixels in a random direction.
    pub landmark_shift: f64,
    /// Probability that a landmark is replaced by a uniform in-frame point.
    pub outlier_rate: f64,
    /// Positive dilates the mask by this radius, negative erodes.
    pub mask_morph_radius: i64,
    /// Erode the mask until this fraction of its area is gone.
    pub mask_erode_fraction: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            landmark_sigma: 0.0,
            landmark_shift: 0.0,
            outlier_rate: 0.0,
            mask_morph_radius: 0,
            mask_erode_fraction: 0.0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.landmark_sigma >= 0.0
            && self.landmark_shift >= 0.0
            && (0.0..=1.0).contains(&self.outlier_rate)
            && (0.0..=1.0).contains(&self.mask_erode_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::Config("noise parameters must be non-negative, rates in [0, 1]".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MaskMethod {
    /// Fill projected triangles.
    Raster,
    /// Disks at projected vertices followed by a morphological close.
    Splat { radius: usize, close: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    /// Root-relative mesh; a random hand is generated when absent.
    pub mesh: Option<PathBuf>,
    /// Required together with `mesh`.
    pub regressor: Option<PathBuf>,
    pub intrinsics: CameraIntrinsics,
    /// `[width, height]` in pixels.
    pub image_size: [usize; 2],
    /// Fixed ground-truth root; sampled in frame when absent.
    pub root: Option<Vec3>,
    /// Depth range for sampled roots, meters.
    pub depth_range: [f64; 2],
    pub noise: NoiseModel,
    pub mask_method: MaskMethod,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            mesh: None,
            regressor: None,
            intrinsics: CameraIntrinsics::new(500.0, 500.0, 256.0, 256.0).expect("valid"),
            image_size: [512, 512],
            root: None,
            depth_range: [0.3, 1.0],
            noise: NoiseModel::default(),
            mask_method: MaskMethod::Raster,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.mesh.is_some() != self.regressor.is_some() {
            return Err(Error::Config("mesh and regressor paths must be given together".into()));
        }
        let [lo, hi] = self.depth_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::Config(format!("invalid depth range [{lo}, {hi}]")));
        }
        if self.image_size[0] == 0 || self.image_size[1] == 0 {
            return Err(Error::Config("image size must be positive".into()));
        }
        if let Some(r) = self.root {
            if !(r.z > 0.0) {
                return Err(Error::Config("root must have z > 0".into()));
            }
        }
        Ok(())
    }

    /// Resolves relative mesh/regressor paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.mesh, &mut self.regressor].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Ground truth written next to each scene; also readable as a pose sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub id: Option<String>,
    pub seed: u64,
    pub root: Vec3,
    /// Camera-space joints.
    pub joints: Vec<Vec3>,
    /// Camera-space vertices.
    pub vertices: Vec<Vec3>,
    pub landmarks_exact: Vec<Vec2>,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub seed: u64,
    pub intrinsics: CameraIntrinsics,
    pub width: usize,
    pub height: usize,
    /// Root-relative mesh.
    pub mesh: TriangleMesh,
    pub regressor: JointRegressor,
    pub root: Vec3,
    pub landmarks_exact: Landmarks2D,
    pub landmarks: Landmarks2D,
    pub mask: SilhouetteMask,
}

pub mod files {
    pub const MESH: &str = "mesh.obj";
    pub const REGRESSOR: &str = "regressor.json";
    pub const INTRINSICS: &str = "intrinsics.json";
    pub const LANDMARKS: &str = "landmarks.json";
    pub const MASK: &str = "mask.png";
    pub const GROUND_TRUTH: &str = "gt.json";
}

impl Scene {
    /// Camera-space vertices.
    pub fn vertices_cs(&self) -> Vec<Vec3> {
        self.mesh.vertices().iter().map(|v| v + self.root).collect()
    }

    pub fn joints_cs(&self) -> Vec<Vec3> {
        self.regressor
            .regress(&self.vertices_cs())
            .expect("regressor matches mesh")
    }

    /// Projected camera-space vertices.
    pub fn projected_vertices(&self) -> Vec<Vec2> {
        project_points(&self.vertices_cs(), &self.intrinsics).expect("scene is in front of the camera")
    }

    pub fn ground_truth(&self, id: Option<String>) -> GroundTruth {
        GroundTruth {
            id,
            seed: self.seed,
            root: self.root,
            joints: self.joints_cs(),
            vertices: self.vertices_cs(),
            landmarks_exact: self.landmarks_exact.points.clone(),
        }
    }

    /// Writes the scene files into `dir` (created if missing).
    pub fn write(&self, dir: &Path, id: Option<String>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.mesh.save_obj(dir.join(files::MESH))?;
        crate::io::write_atomic(&dir.join(files::REGRESSOR), self.regressor.to_json().as_bytes())?;
        crate::io::write_json(&dir.join(files::INTRINSICS), &self.intrinsics)?;
        crate::io::write_json(&dir.join(files::LANDMARKS), &self.landmarks)?;
        self.mask.save(dir.join(files::MASK))?;
        crate::io::write_json(&dir.join(files::GROUND_TRUTH), &self.ground_truth(id))
    }
}

/// Closed lat-long ellipsoid. Axis 0 of `frame` is the pole axis.
struct Ellipsoid {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    rings: usize,
    segments: usize,
}

impl Ellipsoid {
    fn new(center: Vec3, frame: &Matrix3<f64>, radii: Vec3, rings: usize, segments: usize) -> Self {
        let mut vertices = Vec::with_capacity(rings * segments + 2);
        vertices.push(center - frame.column(0) * radii.x);
        for i in 1..=rings {
            let theta = std::f64::consts::PI * i as f64 / (rings + 1) as f64;
            for j in 0..segments {
                let phi = std::f64::consts::TAU * j as f64 / segments as f64;
                let local = Vec3::new(-theta.cos() * radii.x, theta.sin() * phi.cos() * radii.y, theta.sin() * phi.sin() * radii.z);
                vertices.push(center + frame * local);
            }
        }
        vertices.push(center + frame.column(0) * radii.x);
        let ring = |i: usize, j: usize| 1 + (i - 1) * segments + j % segments;
        let top = rings * segments + 1;
        let mut faces = Vec::with_capacity(2 * rings * segments);
        for j in 0..segments {
            faces.push([0, ring(1, j + 1), ring(1, j)]);
        }
        for i in 1..rings {
            for j in 0..segments {
                let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1));
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            }
        }
        for j in 0..segments {
            faces.push([top, ring(rings, j), ring(rings, j + 1)]);
        }
        Self {
            vertices,
            faces,
            rings,
            segments,
        }
    }

    fn bottom(&self) -> usize {
        0
    }

    fn top(&self) -> usize {
        self.rings * self.segments + 1
    }

    /// Ring whose axial position is closest to `fraction` of the way from
    /// the bottom pole to the top pole.
    fn ring_at(&self, fraction: f64) -> Vec<usize> {
        let i = (1..=self.rings)
            .min_by(|&a, &b| {
                let f = |i: usize| {
                    let t = std::f64::consts::PI * i as f64 / (self.rings + 1) as f64;
                    ((1.0 - t.cos()) / 2.0 - fraction).abs()
                };
                f(a).total_cmp(&f(b))
            })
            .expect("at least one ring");
        (0..self.segments).map(|j| 1 + (i - 1) * self.segments + j).collect()
    }
}

/// Orthonormal frame with `axis` as its first column.
fn frame_along(axis: &Vec3) -> Matrix3<f64> {
    let a = axis.normalize();
    let helper = if a.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let b = helper.cross(&a).normalize();
    let c = a.cross(&b);
    Matrix3::from_columns(&[a, b, c])
}

/// Random right hand: palm, four fingers and a thumb as overlapping
/// ellipsoids, randomly posed and rotated, translated so the wrist joint is
/// at the origin. Joint order: wrist, then MCP, PIP, DIP, TIP per finger from
/// thumb to little finger.
pub fn random_hand(rng: &mut impl Rng) -> (TriangleMesh, JointRegressor) {
    let scale = rng.random_range(0.9..1.1);
    let mut vertices = Vec::with_capacity(HAND_VERTICES);
    let mut faces = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(HAND_JOINTS);
    let mut append = |e: Ellipsoid, vertices: &mut Vec<Vec3>| -> usize {
        let base = vertices.len();
        vertices.extend(e.vertices);
        faces.extend(e.faces.iter().map(|f| f.map(|i| i + base)));
        base
    };

    let palm = Ellipsoid::new(
        Vec3::new(0.0, 0.05, 0.0) * scale,
        &frame_along(&Vec3::y()),
        Vec3::new(0.05, 0.042, 0.016) * scale,
        14,
        16,
    );
    let wrist_ring = palm.ring_at(0.0);
    let base = append(palm, &mut vertices);
    rows.push(wrist_ring.iter().map(|i| i + base).collect());

    // (base x, base y, base z, length, radius, spread direction x, rings, segments)
    let digits = [
        (0.03, 0.03, 0.005, 0.07, 0.011, 0.8, 10, 11),
        (0.027, 0.085, 0.0, 0.075, 0.009, 0.12, 9, 12),
        (0.009, 0.088, 0.0, 0.082, 0.0095, 0.03, 9, 12),
        (-0.009, 0.086, 0.0, 0.077, 0.009, -0.06, 9, 12),
        (-0.026, 0.08, 0.0, 0.062, 0.008, -0.15, 9, 12),
    ];
    for (k, &(bx, by, bz, len, rad, spread, rings, segments)) in digits.iter().enumerate() {
        let len = len * scale * rng.random_range(0.9..1.1);
        let flex: f64 = rng.random_range(0.0..0.7);
        let abduct: f64 = rng.random_range(-0.1..0.1);
        let mut dir = Vec3::new(spread + abduct, if k == 0 { 0.6 } else { 1.0 }, if k == 0 { 0.3 } else { 0.0 }).normalize();
        dir = Rotation3::from_axis_angle(&Vector3::x_axis(), flex) * dir;
        let start = Vec3::new(bx, by, bz) * scale;
        let e = Ellipsoid::new(
            start + dir * (len / 2.0),
            &frame_along(&dir),
            Vec3::new(len / 2.0, rad * scale, rad * scale),
            rings,
            segments,
        );
        let (mcp, pip, dip, tip) = (e.bottom(), e.ring_at(0.45), e.ring_at(0.75), e.top());
        let b = append(e, &mut vertices);
        rows.push(vec![mcp + b]);
        rows.push(pip.iter().map(|i| i + b).collect());
        rows.push(dip.iter().map(|i| i + b).collect());
        rows.push(vec![tip + b]);
    }
    debug_assert_eq!(vertices.len(), HAND_VERTICES);

    let entries: Vec<(usize, usize, f64)> = rows
        .iter()
        .enumerate()
        .flat_map(|(r, cols)| cols.iter().map(move |&c| (r, c, 1.0 / cols.len() as f64)))
        .collect();
    let regressor = JointRegressor::from_entries(HAND_JOINTS, vertices.len(), &entries).expect("valid regressor");

    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let rot = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
    let rotated: Vec<Vec3> = vertices.iter().map(|v| rot * v).collect();
    let wrist = regressor.regress(&rotated).expect("shapes match")[0];
    let rel: Vec<Vec3> = rotated.iter().map(|v| v - wrist).collect();
    (TriangleMesh::new(rel, faces).expect("hand mesh is valid"), regressor)
}

fn in_frame(points: &[Vec2], width: usize, height: usize, margin: f64) -> bool {
    points
        .iter()
        .all(|p| p.x >= margin && p.y >= margin && p.x <= width as f64 - 1.0 - margin && p.y <= height as f64 - 1.0 - margin)
}

/// Builds one scene. Identical `(spec, seed)` give identical scenes.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mesh, regressor) = match (&spec.mesh, &spec.regressor) {
        (Some(m), Some(r)) => {
            let mesh = TriangleMesh::load_obj(m)?;
            let reg = JointRegressor::load_json(r)?;
            if reg.vertex_count() != mesh.vertex_count() {
                return Err(Error::ShapeMismatch(format!(
                    "regressor has {} columns, mesh has {} vertices",
                    reg.vertex_count(),
                    mesh.vertex_count()
                )));
            }
            (mesh, reg)
        }
        _ => random_hand(&mut rng),
    };
    let k = spec.intrinsics;
    let [width, height] = spec.image_size;

    let root = match spec.root {
        Some(r) => r,
        None => {
            let [lo, hi] = spec.depth_range;
            let z = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let mut chosen = k.back_project(&Vec2::new(k.cx, k.cy), z);
            for _ in 0..1000 {
                let px = Vec2::new(rng.random_range(0.0..width as f64), rng.random_range(0.0..height as f64));
                let t = k.back_project(&px, z);
                let visible = mesh.vertices().iter().all(|v| v.z + t.z > 0.05 * z);
                if visible && in_frame(&project_points(mesh.translated(&t).vertices(), &k)?, width, height, 4.0) {
                    chosen = t;
                    break;
                }
            }
            chosen
        }
    };

    let vertices_cs: Vec<Vec3> = mesh.vertices().iter().map(|v| v + root).collect();
    let projected = project_points(&vertices_cs, &k)?;
    let joints_cs = regressor.regress(&vertices_cs)?;
    let exact = project_points(&joints_cs, &k)?;

    let noise = &spec.noise;
    let mut points = exact.clone();
    if noise.landmark_sigma > 0.0 {
        let n = Normal::new(0.0, noise.landmark_sigma).expect("sigma is finite");
        for p in &mut points {
            *p += Vec2::new(n.sample(&mut rng), n.sample(&mut rng));
        }
    }
    if noise.landmark_shift > 0.0 {
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let shift = Vec2::new(a.cos(), a.sin()) * noise.landmark_shift;
        for p in &mut points {
            *p += shift;
        }
    }
    if noise.outlier_rate > 0.0 {
        for p in &mut points {
            if rng.random_bool(noise.outlier_rate) {
                *p = Vec2::new(rng.random_range(0.0..width as f64), rng.random_range(0.0..height as f64));
            }
        }
    }

    let mut mask = match spec.mask_method {
        MaskMethod::Raster => rasterize_triangles(&projected, mesh.faces(), width, height),
        MaskMethod::Splat { radius, close } => {
            let mut m = SilhouetteMask::empty(width, height);
            for p in &projected {
                let (x, y) = (p.x.round(), p.y.round());
                if x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height {
                    m.set(x as usize, y as usize, true);
                }
            }
            m.dilate(radius).close(close)
        }
    };
    mask = mask.morph(noise.mask_morph_radius);
    if noise.mask_erode_fraction > 0.0 {
        mask = mask.erode_fraction(noise.mask_erode_fraction);
    }

    Ok(Scene {
        seed,
        intrinsics: k,
        width,
        height,
        mesh,
        regressor,
        root,
        landmarks_exact: Landmarks2D::new(exact)?,
        landmarks: Landmarks2D::new(points)?,
        mask,
    })
}
