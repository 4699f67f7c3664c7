//! Root recovery: 2D landmark matching, 1D span alignment and their
//! adaptive fusion.
//!
//! Both energies are minimized over the root translation `t` only, with
//! Levenberg-Marquardt iterations on a 3x3 normal system. The 1D energy takes
//! max/min over vertices, so it is solved by alternating between fixing the
//! extremal vertex of every span endpoint and a damped Gauss-Newton solve on
//! the resulting smooth residuals.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, JointRegressor, Landmarks2D, RootTranslation, TriangleMesh, MIN_DEPTH};
use crate::silhouette::{extract_contour, make_axes, AxisSet, Contour, SilhouetteMask, SpanSet};
use crate::{Vec2, Vec3};

/// How `solve_e2d` picks its starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Depth from the ratio of 3D to 2D joint spread, x/y from
    /// back-projecting the landmark centroid.
    WeakPerspective,
    Fixed(Vec3),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationConfig {
    /// Above this 2D-1D distance (meters) the 1D solution is used alone.
    pub delta1: f64,
    /// At or below this distance the 2D solution is used alone.
    pub delta2: f64,
    pub axis_count: usize,
    pub max_iterations: usize,
    /// Step-norm convergence threshold in meters.
    pub tolerance: f64,
    /// Extremum re-selection rounds for the 1D solve.
    pub max_rounds: usize,
    pub initial_damping: f64,
    pub initial_guess: InitialGuess,
    /// Depth used by the weak-perspective guess when the joint spread is
    /// degenerate.
    pub fallback_depth: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self::hand()
    }
}

impl RegistrationConfig {
    pub fn hand() -> Self {
        Self {
            delta1: 0.06,
            delta2: 0.02,
            axis_count: 12,
            max_iterations: 100,
            tolerance: 1e-8,
            max_rounds: 30,
            initial_damping: 1e-3,
            initial_guess: InitialGuess::WeakPerspective,
            fallback_depth: 0.5,
        }
    }

    pub fn body() -> Self {
        Self {
            delta1: 1.0,
            delta2: 0.5,
            fallback_depth: 3.0,
            ..Self::hand()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta2 > 0.0 && self.delta1 > self.delta2) {
            return Err(Error::DeltaOrder {
                delta1: self.delta1,
                delta2: self.delta2,
            });
        }
        if self.axis_count < 2 {
            return Err(Error::InvalidAxisCount(self.axis_count));
        }
        if self.max_iterations == 0 || self.max_rounds == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.initial_damping > 0.0 && self.fallback_depth > 0.0) {
            return Err(Error::Config(
                "tolerance, initial damping and fallback depth must be positive".into(),
            ));
        }
        if let InitialGuess::Fixed(t) = self.initial_guess {
            if !(t.z > 0.0) {
                return Err(Error::Config("fixed initial guess must have z > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration budget exhausted; the best iterate is returned. Problems
    /// whose normal matrix is rank deficient never count as converged.
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub t: Vec3,
    /// Final energy (pixels squared).
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Smooth least-squares problem in the root translation.
trait Residuals {
    /// `None` when some point falls at or behind the camera plane.
    fn residuals(&self, t: &Vec3) -> Option<Vec<f64>>;
    fn jacobian(&self, t: &Vec3) -> Vec<Vec3>;
}

fn energy(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn well_conditioned(a: &Matrix3<f64>) -> bool {
    let ev = SymmetricEigen::new(*a).eigenvalues;
    let max = ev.max();
    max > 0.0 && ev.min() > max * 1e-12
}

fn levenberg_marquardt(problem: &impl Residuals, t0: Vec3, cfg: &RegistrationConfig) -> Result<SolveOutcome> {
    let mut t = t0;
    let mut r = problem.residuals(&t).ok_or(Error::DivergedBehindCamera)?;
    let mut e = energy(&r);
    let initial = e;
    let mut lambda = cfg.initial_damping;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut only_behind = true;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let jac = problem.jacobian(&t);
        let mut a = Matrix3::zeros();
        let mut g = Vec3::zeros();
        for (row, ri) in jac.iter().zip(&r) {
            a += row * row.transpose();
            g += row * *ri;
        }
        let full_rank = well_conditioned(&a);
        if e == 0.0 {
            if full_rank {
                status = SolveStatus::Converged;
                break;
            }
            continue;
        }
        let floor = a.diagonal().max() * 1e-9;
        let mut damped = a;
        for i in 0..3 {
            damped[(i, i)] += lambda * a[(i, i)].max(floor);
        }
        let Some(step) = damped.lu().solve(&-g) else {
            lambda *= 10.0;
            continue;
        };
        let step_norm = step.norm();
        let trial = t + step;
        match problem.residuals(&trial) {
            Some(rn) if energy(&rn) < e => {
                t = trial;
                e = energy(&rn);
                r = rn;
                lambda = (lambda * 0.1).max(1e-12);
                only_behind = false;
            }
            Some(_) => {
                lambda *= 10.0;
                only_behind = false;
            }
            None => lambda *= 10.0,
        }
        if step_norm < cfg.tolerance && full_rank {
            status = SolveStatus::Converged;
            break;
        }
        if lambda > 1e20 {
            if only_behind {
                return Err(Error::DivergedBehindCamera);
            }
            break;
        }
    }
    Ok(SolveOutcome {
        t,
        residual: e,
        initial_residual: initial,
        iterations,
        status,
    })
}

/// Landmark reprojection energy `sum_i w_i |p_i - K (J V + t)_i|^2` as a
/// function of `t`. Joints are regressed once from the root-relative mesh;
/// row-stochastic regressors commute with translation.
#[derive(Debug, Clone)]
pub struct E2dProblem {
    joints: Vec<Vec3>,
    targets: Vec<Vec2>,
    sqrt_w: Vec<f64>,
    k: CameraIntrinsics,
}

impl E2dProblem {
    pub fn new(mesh_rel: &TriangleMesh, j: &JointRegressor, k: &CameraIntrinsics, landmarks: &Landmarks2D) -> Result<Self> {
        let joints = j.regress(mesh_rel.vertices())?;
        Self::from_joints(joints, k, landmarks)
    }

    pub fn from_joints(joints: Vec<Vec3>, k: &CameraIntrinsics, landmarks: &Landmarks2D) -> Result<Self> {
        if joints.len() != landmarks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} joints but {} landmarks",
                joints.len(),
                landmarks.len()
            )));
        }
        if joints.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            sqrt_w: (0..landmarks.len()).map(|i| landmarks.weight(i).sqrt()).collect(),
            targets: landmarks.points.clone(),
            joints,
            k: *k,
        })
    }

    pub fn joints(&self) -> &[Vec3] {
        &self.joints
    }

    pub fn energy(&self, t: &Vec3) -> Option<f64> {
        self.residuals(t).map(|r| energy(&r))
    }

    /// Residual vector `(q_x - p_x, q_y - p_y)` per landmark, weighted.
    pub fn residual_vector(&self, t: &Vec3) -> Option<Vec<f64>> {
        self.residuals(t)
    }

    /// Analytic Jacobian of [`Self::residual_vector`], one row per residual.
    pub fn jacobian_rows(&self, t: &Vec3) -> Vec<Vec3> {
        self.jacobian(t)
    }

    /// Closed-form weak-perspective starting point.
    pub fn weak_perspective_guess(&self, fallback_depth: f64) -> Vec3 {
        let wsum: f64 = self.sqrt_w.iter().map(|s| s * s).sum::<f64>().max(f64::MIN_POSITIVE);
        let w = |i: usize| self.sqrt_w[i] * self.sqrt_w[i];
        let c3: Vec3 = self.joints.iter().enumerate().map(|(i, p)| p * w(i)).sum::<Vec3>() / wsum;
        let c2: Vec2 = self.targets.iter().enumerate().map(|(i, p)| p * w(i)).sum::<Vec2>() / wsum;
        let rms3 = (self
            .joints
            .iter()
            .enumerate()
            .map(|(i, p)| w(i) * ((p.x - c3.x).powi(2) + (p.y - c3.y).powi(2)))
            .sum::<f64>()
            / wsum)
            .sqrt();
        let rms2 = (self
            .targets
            .iter()
            .enumerate()
            .map(|(i, p)| w(i) * (p - c2).norm_squared())
            .sum::<f64>()
            / wsum)
            .sqrt();
        let f = 0.5 * (self.k.fx + self.k.fy);
        let mut depth = if rms2 > 1e-9 && rms3 > 1e-12 {
            f * rms3 / rms2
        } else {
            fallback_depth
        };
        // keep every joint in front of the camera
        let min_rel = self.joints.iter().map(|p| p.z - c3.z).fold(0.0, f64::min);
        if depth + min_rel <= MIN_DEPTH {
            depth = MIN_DEPTH * 10.0 - min_rel;
        }
        self.k.back_project(&c2, depth) - c3
    }
}

impl Residuals for E2dProblem {
    fn residuals(&self, t: &Vec3) -> Option<Vec<f64>> {
        let mut r = Vec::with_capacity(2 * self.joints.len());
        for ((p, target), s) in self.joints.iter().zip(&self.targets).zip(&self.sqrt_w) {
            let x = p + t;
            if x.z <= MIN_DEPTH {
                return None;
            }
            let q = self.k.project(&x);
            r.push(s * (q.x - target.x));
            r.push(s * (q.y - target.y));
        }
        Some(r)
    }

    fn jacobian(&self, t: &Vec3) -> Vec<Vec3> {
        let mut rows = Vec::with_capacity(2 * self.joints.len());
        for (p, s) in self.joints.iter().zip(&self.sqrt_w) {
            let [jx, jy] = self.k.project_jacobian(&(p + t));
            rows.push(jx * *s);
            rows.push(jy * *s);
        }
        rows
    }
}

/// Minimizes the 2D landmark energy over the root translation.
pub fn solve_e2d(
    mesh_rel: &TriangleMesh,
    j: &JointRegressor,
    k: &CameraIntrinsics,
    landmarks: &Landmarks2D,
    config: &RegistrationConfig,
) -> Result<SolveOutcome> {
    config.validate()?;
    let problem = E2dProblem::new(mesh_rel, j, k, landmarks)?;
    let t0 = match config.initial_guess {
        InitialGuess::WeakPerspective => problem.weak_perspective_guess(config.fallback_depth),
        InitialGuess::Fixed(t) => t,
    };
    levenberg_marquardt(&problem, t0, config)
}

/// Extremal vertex per span endpoint: `(argmin, argmax)` for every axis.
type Selection = Vec<(usize, usize)>;

/// Span alignment of projected mesh vertices against contour spans.
#[derive(Debug, Clone)]
pub struct E1dProblem {
    vertices: Vec<Vec3>,
    axes: Vec<Vec2>,
    target: SpanSet,
    k: CameraIntrinsics,
}

impl E1dProblem {
    pub fn new(mesh_rel: &TriangleMesh, k: &CameraIntrinsics, contour: &Contour, axes: &AxisSet) -> Result<Self> {
        if contour.len() < 3 {
            return Err(Error::DegenerateContour(contour.len()));
        }
        if mesh_rel.vertex_count() == 0 {
            return Err(Error::EmptyPointSet);
        }
        Ok(Self {
            vertices: mesh_rel.vertices().to_vec(),
            axes: axes.axes().to_vec(),
            target: contour.spans(axes)?,
            k: *k,
        })
    }

    pub fn target_spans(&self) -> &SpanSet {
        &self.target
    }

    /// Spans of the mesh projected at root `t`.
    pub fn mesh_spans(&self, t: &Vec3) -> Option<SpanSet> {
        let (spans, _) = self.spans_and_selection(t)?;
        Some(spans)
    }

    /// The full (non-smooth) 1D energy at `t`.
    pub fn energy(&self, t: &Vec3) -> Option<f64> {
        let s = self.mesh_spans(t)?;
        Some(
            s.spans
                .iter()
                .zip(&self.target.spans)
                .map(|(m, c)| (c.1 - m.1).powi(2) + (c.0 - m.0).powi(2))
                .sum(),
        )
    }

    fn spans_and_selection(&self, t: &Vec3) -> Option<(SpanSet, Selection)> {
        let mut projected = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let x = v + t;
            if x.z <= MIN_DEPTH {
                return None;
            }
            projected.push(self.k.project(&x));
        }
        let mut spans = Vec::with_capacity(self.axes.len());
        let mut sel = Vec::with_capacity(self.axes.len());
        for a in &self.axes {
            let (mut lo, mut hi) = ((f64::INFINITY, 0), (f64::NEG_INFINITY, 0));
            for (i, p) in projected.iter().enumerate() {
                let v = p.dot(a);
                if v < lo.0 {
                    lo = (v, i);
                }
                if v > hi.0 {
                    hi = (v, i);
                }
            }
            spans.push((lo.0, hi.0));
            sel.push((lo.1, hi.1));
        }
        Some((SpanSet { spans }, sel))
    }
}

/// The 1D energy with the extremal vertices held fixed.
struct FixedSelection<'a> {
    problem: &'a E1dProblem,
    selection: Selection,
}

impl Residuals for FixedSelection<'_> {
    fn residuals(&self, t: &Vec3) -> Option<Vec<f64>> {
        let p = self.problem;
        let mut r = Vec::with_capacity(2 * p.axes.len());
        for ((a, &(lo, hi)), span) in p.axes.iter().zip(&self.selection).zip(&p.target.spans) {
            let xl = p.vertices[lo] + t;
            let xh = p.vertices[hi] + t;
            if xl.z <= MIN_DEPTH || xh.z <= MIN_DEPTH {
                return None;
            }
            r.push(p.k.project(&xl).dot(a) - span.0);
            r.push(p.k.project(&xh).dot(a) - span.1);
        }
        Some(r)
    }

    fn jacobian(&self, t: &Vec3) -> Vec<Vec3> {
        let p = self.problem;
        let mut rows = Vec::with_capacity(2 * p.axes.len());
        for (a, &(lo, hi)) in p.axes.iter().zip(&self.selection) {
            for v in [lo, hi] {
                let [jx, jy] = p.k.project_jacobian(&(p.vertices[v] + t));
                rows.push(jx * a.x + jy * a.y);
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E1dOutcome {
    #[serde(flatten)]
    pub solve: SolveOutcome,
    /// Extremum re-selection rounds used.
    pub rounds: usize,
}

/// Minimizes the 1D span energy starting from `t_init`.
pub fn solve_e1d(
    mesh_rel: &TriangleMesh,
    k: &CameraIntrinsics,
    contour: &Contour,
    axes: &AxisSet,
    t_init: Vec3,
    config: &RegistrationConfig,
) -> Result<E1dOutcome> {
    config.validate()?;
    if !(t_init.z > 0.0) {
        return Err(Error::Config("initial root must have z > 0".into()));
    }
    let problem = E1dProblem::new(mesh_rel, k, contour, axes)?;
    let (_, mut selection) = problem.spans_and_selection(&t_init).ok_or(Error::DivergedBehindCamera)?;
    let initial = problem.energy(&t_init).expect("checked above");

    let mut t = t_init;
    let mut best = (initial, t_init);
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut rounds = 0;
    while rounds < config.max_rounds {
        rounds += 1;
        let inner = levenberg_marquardt(
            &FixedSelection {
                problem: &problem,
                selection: selection.clone(),
            },
            t,
            config,
        )?;
        iterations += inner.iterations;
        let moved = (inner.t - t).norm();
        t = inner.t;
        let (_, next) = problem.spans_and_selection(&t).ok_or(Error::DivergedBehindCamera)?;
        let e = problem.energy(&t).expect("in front of camera");
        if e < best.0 {
            best = (e, t);
        }
        let stable = next == selection;
        selection = next;
        if stable && (inner.status == SolveStatus::Converged || moved < config.tolerance) {
            status = SolveStatus::Converged;
            break;
        }
    }
    let (residual, t) = if status == SolveStatus::Converged {
        (problem.energy(&t).expect("in front of camera"), t)
    } else {
        best
    };
    Ok(E1dOutcome {
        solve: SolveOutcome {
            t,
            residual,
            initial_residual: initial,
            iterations,
            status,
        },
        rounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(rename = "use_1d")]
    Use1d,
    Blend,
    #[serde(rename = "use_2d")]
    Use2d,
}

/// Adaptive fusion of the two root estimates by their distance `d`:
/// `d > delta1` keeps `t1d`, `d > delta2` blends linearly, otherwise `t2d`.
///
/// Returns `(t_star, regime, d)`.
pub fn adaptive_fuse(t2d: &Vec3, t1d: &Vec3, config: &RegistrationConfig) -> (Vec3, Regime, f64) {
    let (d1, d2) = (config.delta1, config.delta2);
    let d = (t2d - t1d).norm();
    if d > d1 {
        (*t1d, Regime::Use1d, d)
    } else if d > d2 {
        let w2 = (d1 - d) / (d1 - d2);
        let w1 = (d - d2) / (d1 - d2);
        (t2d * w2 + t1d * w1, Regime::Blend, d)
    } else {
        (*t2d, Regime::Use2d, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub t2d: RootTranslation,
    pub t1d: RootTranslation,
    pub t_star: RootTranslation,
    /// `|t2d - t1d|` in meters.
    pub d: f64,
    pub regime: Regime,
    pub e2d: SolveOutcome,
    /// `None` when the 1D solve failed and the 2D root was used.
    pub e1d: Option<E1dOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1d_error: Option<String>,
}

/// Full pipeline: 2D solve, 1D solve started from the 2D root, fusion.
pub fn register(
    mesh_rel: &TriangleMesh,
    j: &JointRegressor,
    k: &CameraIntrinsics,
    landmarks: &Landmarks2D,
    mask: &SilhouetteMask,
    config: &RegistrationConfig,
) -> Result<RegistrationResult> {
    config.validate()?;
    let contour = extract_contour(mask)?;
    register_with_contour(mesh_rel, j, k, landmarks, &contour, config)
}

/// [`register`] for an already extracted contour.
pub fn register_with_contour(
    mesh_rel: &TriangleMesh,
    j: &JointRegressor,
    k: &CameraIntrinsics,
    landmarks: &Landmarks2D,
    contour: &Contour,
    config: &RegistrationConfig,
) -> Result<RegistrationResult> {
    config.validate()?;
    let e2d = solve_e2d(mesh_rel, j, k, landmarks, config)?;
    let t2d = RootTranslation::new(e2d.t).map_err(|_| Error::DivergedBehindCamera)?;
    let axes = make_axes(config.axis_count)?;

    let e1d = solve_e1d(mesh_rel, k, contour, &axes, e2d.t, config)
        .and_then(|o| RootTranslation::new(o.solve.t).map(|t| (o, t)).map_err(|_| Error::DivergedBehindCamera));
    match e1d {
        Ok((outcome, t1d)) => {
            let (t_star, regime, d) = adaptive_fuse(&e2d.t, &outcome.solve.t, config);
            Ok(RegistrationResult {
                t2d,
                t1d,
                t_star: RootTranslation::new(t_star)?,
                d,
                regime,
                e2d,
                e1d: Some(outcome),
                e1d_error: None,
            })
        }
        Err(err) => {
            log::warn!("1D registration failed, keeping the 2D root: {err}");
            Ok(RegistrationResult {
                t2d,
                t1d: t2d,
                t_star: t2d,
                d: 0.0,
                regime: Regime::Use2d,
                e2d,
                e1d: None,
                e1d_error: Some(format!("{}: {err}", err.code())),
            })
        }
    }
}
