//! The `cmr` command line: `register`, `synth`, `spiral`, `eval`, `plot`.
//!
//! Errors are printed to stderr as `{"error": {"code": ..., "message": ...}}`
//! and mapped to exit status 2 (input or configuration) or 3 (computation).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project_points, CameraIntrinsics, JointRegressor, Landmarks2D, TriangleMesh};
use crate::metrics::{self, PoseSample};
use crate::registration::{register, E2dProblem, RegistrationConfig, RegistrationResult};
use crate::silhouette::{extract_contour, make_axes, project_spans, SilhouetteMask, SpanSet};
use crate::spiral::{build_spiral_index, spiral_sequence, DEFAULT_RING_LENGTHS};
use crate::synth::{files, generate_scene, MaskMethod, SceneSpec};
use crate::{Vec2, Vec3};

#[derive(Debug, Parser)]
#[command(name = "cmr", version, about = "Camera-space mesh recovery toolkit")]
pub struct Cli {
    /// TOML or JSON file with `registration`, `scene` and `eval` tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory; `register` and `eval` print to stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover the camera-space root of a root-relative mesh.
    Register(RegisterArgs),
    /// Write seeded synthetic scenes.
    Synth(SynthArgs),
    /// Print the spiral neighbourhood of a vertex.
    Spiral(SpiralArgs),
    /// Pose metrics of predictions against references.
    Eval(EvalArgs),
    /// SVG overlays of registration results.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Hand,
    Body,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Scene directories laid out as written by `synth`. Explicit file flags
    /// override the matching file of a single scene.
    #[arg(long = "scene", num_args = 1..)]
    pub scenes: Vec<PathBuf>,
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub regressor: Option<PathBuf>,
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long)]
    pub axes: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of scenes; seeds are `seed..seed + count`, and several scenes
    /// go to `scene_<seed>` subdirectories.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub landmark_sigma: Option<f64>,
    #[arg(long)]
    pub landmark_shift: Option<f64>,
    #[arg(long)]
    pub outlier_rate: Option<f64>,
    /// Positive dilates, negative erodes.
    #[arg(long, allow_hyphen_values = true)]
    pub mask_morph: Option<i64>,
    #[arg(long)]
    pub mask_erode_fraction: Option<f64>,
    /// Vertex splats plus closing instead of triangle rasterization.
    #[arg(long)]
    pub splat: bool,
}

#[derive(Debug, Args)]
pub struct SpiralArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub vertex: usize,
    #[arg(long, default_value_t = 1)]
    pub max_ring: usize,
    /// Per-ring segment lengths, e.g. `8,16,24`; rings are untruncated when
    /// absent.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction files, paired in order with `--gt`.
    #[arg(long, num_args = 1.., required = true)]
    pub pred: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    pub gt: Vec<PathBuf>,
    #[arg(long)]
    pub root_index: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// `register` output files (`result.json`).
    pub results: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub root_index: usize,
    /// PCK threshold range in millimeters.
    pub pck_range: [f64; 2],
    pub pck_steps: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            root_index: 0,
            pck_range: [0.0, 50.0],
            pck_steps: 100,
        }
    }
}

/// Contents of the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<Preset>,
    pub registration: Option<RegistrationConfig>,
    pub scene: SceneSpec,
    pub eval: EvalConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let mut cfg: FileConfig = if is_toml {
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?
        };
        if let Some(dir) = path.parent() {
            cfg.scene.resolve_paths(dir);
        }
        Ok(cfg)
    }
}

/// Projected 2D data of one registration, enough to draw the overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub width: usize,
    pub height: usize,
    pub axes: Vec<Vec2>,
    pub contour: Vec<Vec2>,
    pub contour_spans: SpanSet,
    pub landmarks: Vec<Vec2>,
    /// Starting root of the 2D solve.
    pub initial_root: Vec3,
    pub before: Vec<Vec2>,
    pub before_spans: SpanSet,
    pub after: Vec<Vec2>,
    pub after_spans: SpanSet,
}

/// What `register` writes per scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterReport {
    pub result: RegistrationResult,
    pub overlay: Overlay,
}

/// Runs the command line with `std::env::args` and returns the exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    init_logging();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let report = serde_json::json!({"error": {"code": e.code(), "message": e.to_string()}});
            eprintln!("{report}");
            e.exit_code()
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("CMR_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

pub fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if cli.jobs > 0 {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match &cli.command {
        Command::Register(a) => cmd_register(cli, &file, a),
        Command::Synth(a) => cmd_synth(cli, &file, a),
        Command::Spiral(a) => cmd_spiral(cli, a),
        Command::Eval(a) => cmd_eval(cli, &file, a),
        Command::Plot(a) => cmd_plot(cli, a),
    }
}

fn registration_config(file: &FileConfig, a: &RegisterArgs) -> Result<RegistrationConfig> {
    let preset = a.preset.or(file.preset).unwrap_or(Preset::Hand);
    let mut cfg = match (&file.registration, preset) {
        (Some(c), _) => c.clone(),
        (None, Preset::Hand) => RegistrationConfig::hand(),
        (None, Preset::Body) => RegistrationConfig::body(),
    };
    if let Some(d) = a.delta1 {
        cfg.delta1 = d;
    }
    if let Some(d) = a.delta2 {
        cfg.delta2 = d;
    }
    if let Some(n) = a.axes {
        cfg.axis_count = n;
    }
    if let Some(n) = a.max_iterations {
        cfg.max_iterations = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct SceneFiles {
    name: String,
    mesh: PathBuf,
    regressor: PathBuf,
    intrinsics: PathBuf,
    landmarks: PathBuf,
    mask: PathBuf,
}

fn scene_files(a: &RegisterArgs) -> Result<Vec<SceneFiles>> {
    let missing = |what: &str| Error::Config(format!("missing --{what} (or --scene)"));
    if a.scenes.len() > 1
        && (a.mesh.is_some() || a.regressor.is_some() || a.intrinsics.is_some() || a.landmarks.is_some() || a.mask.is_some())
    {
        return Err(Error::Config("file flags cannot be combined with several --scene directories".into()));
    }
    if a.scenes.is_empty() {
        return Ok(vec![SceneFiles {
            name: "scene".into(),
            mesh: a.mesh.clone().ok_or_else(|| missing("mesh"))?,
            regressor: a.regressor.clone().ok_or_else(|| missing("regressor"))?,
            intrinsics: a.intrinsics.clone().ok_or_else(|| missing("intrinsics"))?,
            landmarks: a.landmarks.clone().ok_or_else(|| missing("landmarks"))?,
            mask: a.mask.clone().ok_or_else(|| missing("mask"))?,
        }]);
    }
    Ok(a.scenes
        .iter()
        .map(|d| SceneFiles {
            name: d
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scene".into()),
            mesh: a.mesh.clone().unwrap_or_else(|| d.join(files::MESH)),
            regressor: a.regressor.clone().unwrap_or_else(|| d.join(files::REGRESSOR)),
            intrinsics: a.intrinsics.clone().unwrap_or_else(|| d.join(files::INTRINSICS)),
            landmarks: a.landmarks.clone().unwrap_or_else(|| d.join(files::LANDMARKS)),
            mask: a.mask.clone().unwrap_or_else(|| d.join(files::MASK)),
        })
        .collect())
}

/// Loads one scene's inputs and registers it.
pub fn register_files(
    mesh: &Path,
    regressor: &Path,
    intrinsics: &Path,
    landmarks: &Path,
    mask: &Path,
    cfg: &RegistrationConfig,
) -> Result<(RegisterReport, PoseSample)> {
    let mesh = TriangleMesh::load_obj(mesh)?;
    let j = JointRegressor::load_json(regressor)?;
    let k: CameraIntrinsics = crate::io::read_json(intrinsics)?;
    let lm = Landmarks2D::load_json(landmarks)?;
    let mask = SilhouetteMask::load(mask)?;
    let result = register(&mesh, &j, &k, &lm, &mask, cfg)?;

    let contour = extract_contour(&mask)?;
    let axes = make_axes(cfg.axis_count)?;
    let initial_root = match cfg.initial_guess {
        crate::registration::InitialGuess::WeakPerspective => {
            E2dProblem::new(&mesh, &j, &k, &lm)?.weak_perspective_guess(cfg.fallback_depth)
        }
        crate::registration::InitialGuess::Fixed(t) => t,
    };
    let t_star = result.t_star.vector();
    let before = project_points(mesh.translated(&initial_root).vertices(), &k)?;
    let after_cs = mesh.translated(&t_star);
    let after = project_points(after_cs.vertices(), &k)?;
    let overlay = Overlay {
        width: mask.width(),
        height: mask.height(),
        axes: axes.axes().to_vec(),
        contour_spans: contour.spans(&axes)?,
        contour: contour.points,
        landmarks: lm.points.clone(),
        initial_root,
        before_spans: project_spans(&before, &axes)?,
        before,
        after_spans: project_spans(&after, &axes)?,
        after,
    };
    let pose = PoseSample {
        id: None,
        joints: j.regress(after_cs.vertices())?,
        vertices: Some(after_cs.vertices().to_vec()),
    };
    Ok((RegisterReport { result, overlay }, pose))
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn cmd_register(cli: &Cli, file: &FileConfig, a: &RegisterArgs) -> Result<()> {
    let cfg = registration_config(file, a)?;
    let scenes = scene_files(a)?;
    if scenes.len() > 1 && cli.output.is_none() {
        return Err(Error::Config("--output is required with several scenes".into()));
    }
    let outcomes: Vec<Result<(RegisterReport, PoseSample)>> = scenes
        .par_iter()
        .map(|s| {
            log::info!("registering {}", s.name);
            register_files(&s.mesh, &s.regressor, &s.intrinsics, &s.landmarks, &s.mask, &cfg)
        })
        .collect();
    let single = scenes.len() == 1;
    for (s, outcome) in scenes.iter().zip(outcomes) {
        let (report, mut pose) = outcome?;
        pose.id = Some(s.name.clone());
        match &cli.output {
            Some(out) => {
                let dir = if single { out.clone() } else { out.join(&s.name) };
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                crate::io::write_json(&dir.join("result.json"), &report)?;
                crate::io::write_json(&dir.join("pred.json"), &pose)?;
            }
            None => emit(&serde_json::to_string_pretty(&report.result)?)?,
        }
    }
    Ok(())
}

fn cmd_synth(cli: &Cli, file: &FileConfig, a: &SynthArgs) -> Result<()> {
    let mut spec = file.scene.clone();
    let n = &mut spec.noise;
    if let Some(v) = a.landmark_sigma {
        n.landmark_sigma = v;
    }
    if let Some(v) = a.landmark_shift {
        n.landmark_shift = v;
    }
    if let Some(v) = a.outlier_rate {
        n.outlier_rate = v;
    }
    if let Some(v) = a.mask_morph {
        n.mask_morph_radius = v;
    }
    if let Some(v) = a.mask_erode_fraction {
        n.mask_erode_fraction = v;
    }
    if a.splat {
        spec.mask_method = MaskMethod::Splat { radius: 3, close: 2 };
    }
    spec.validate()?;
    if a.count == 0 {
        return Err(Error::Config("--count must be positive".into()));
    }
    let out = cli.output.clone().unwrap_or_else(|| PathBuf::from("synth"));
    (0..a.count as u64).into_par_iter().try_for_each(|i| {
        let seed = cli.seed.wrapping_add(i);
        let id = format!("scene_{seed:04}");
        let dir = if a.count == 1 { out.clone() } else { out.join(&id) };
        generate_scene(&spec, seed)?.write(&dir, Some(id))
    })?;
    crate::io::write_json(&out.join("spec.json"), &spec)
}

#[derive(Serialize)]
struct SpiralOutput {
    vertex: usize,
    max_ring: usize,
    rings: Vec<Vec<usize>>,
    sequence: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundaries: Option<Vec<usize>>,
}

fn cmd_spiral(cli: &Cli, a: &SpiralArgs) -> Result<()> {
    let mesh = TriangleMesh::load_obj(&a.mesh)?;
    let rings = spiral_sequence(&mesh, a.vertex, a.max_ring)?;
    let out = match &a.lengths {
        None => SpiralOutput {
            vertex: a.vertex,
            max_ring: a.max_ring,
            sequence: rings.concat(),
            rings,
            boundaries: None,
        },
        Some(lengths) => {
            let lengths: Vec<usize> = if lengths.is_empty() {
                DEFAULT_RING_LENGTHS[..a.max_ring.min(3)].to_vec()
            } else {
                lengths.clone()
            };
            let index = build_spiral_index(&mesh, a.max_ring, &lengths)?;
            SpiralOutput {
                vertex: a.vertex,
                max_ring: a.max_ring,
                rings,
                sequence: index.sequence(a.vertex).to_vec(),
                boundaries: Some(index.boundaries().to_vec()),
            }
        }
    };
    match &cli.output {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            crate::io::write_json(&dir.join(format!("spiral_{}.json", a.vertex)), &out)
        }
        None => {
            emit(&serde_json::to_string(&out)?)
        }
    }
}

fn cmd_eval(cli: &Cli, file: &FileConfig, a: &EvalArgs) -> Result<()> {
    if a.pred.len() != a.gt.len() {
        return Err(Error::Config(format!(
            "{} prediction files but {} reference files",
            a.pred.len(),
            a.gt.len()
        )));
    }
    let cfg = &file.eval;
    let root = a.root_index.unwrap_or(cfg.root_index);
    let pairs: Vec<(String, PoseSample, PoseSample)> = a
        .pred
        .iter()
        .zip(&a.gt)
        .enumerate()
        .map(|(i, (p, g))| {
            let pred: PoseSample = crate::io::read_json(p)?;
            let gt: PoseSample = crate::io::read_json(g)?;
            let id = gt.id.clone().or_else(|| pred.id.clone()).unwrap_or_else(|| format!("sample_{i:04}"));
            Ok((id, pred, gt))
        })
        .collect::<Result<_>>()?;
    let thresholds = metrics::thresholds(cfg.pck_range[0], cfg.pck_range[1], cfg.pck_steps);
    let report = metrics::build_report(&pairs, root, &thresholds)?;
    let summary = serde_json::json!({"samples": report.samples.len(), "mean": report.mean, "auc": report.auc});
    if let Some(dir) = &cli.output {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        report.save(dir)?;
    }
    emit(&serde_json::to_string_pretty(&summary)?)
}

fn cmd_plot(cli: &Cli, a: &PlotArgs) -> Result<()> {
    if a.results.is_empty() {
        return Err(Error::Config("plot needs at least one result file".into()));
    }
    let out = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    for (i, path) in a.results.iter().enumerate() {
        let report: RegisterReport = crate::io::read_json(path)?;
        let stem = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .filter(|n| !n.is_empty() && n != ".")
            .unwrap_or_else(|| format!("result_{i:04}"));
        let name = if a.results.len() == 1 { "overlay.svg".to_string() } else { format!("{stem}.svg") };
        crate::io::write_atomic(&out.join(name), overlay_svg(&report.overlay).as_bytes())?;
    }
    Ok(())
}

/// Span gaps of the pre- and post-registration projections against the
/// contour, RMS over all span endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanGaps {
    pub span_gap_before: f64,
    pub span_gap_after: f64,
}

impl Overlay {
    pub fn span_gaps(&self) -> SpanGaps {
        SpanGaps {
            span_gap_before: self.before_spans.rms_gap(&self.contour_spans),
            span_gap_after: self.after_spans.rms_gap(&self.contour_spans),
        }
    }
}

/// Renders the overlay: image panel with contour, landmarks and projected
/// vertices before and after registration, and one row of span bars per axis.
pub fn overlay_svg(o: &Overlay) -> String {
    let (w, h) = (o.width as f64, o.height as f64);
    let row = 14.0;
    let panel = o.axes.len() as f64 * row + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        h + panel,
        h + panel
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", serde_json::to_string(&o.span_gaps()).expect("plain numbers"));
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#999999"/>"##);
    let poly: Vec<String> = o.contour.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#dddddd" stroke="#333333" stroke-width="1"/>"##,
        poly.join(" ")
    );
    for (pts, color) in [(&o.before, "#d62728"), (&o.after, "#2ca02c")] {
        let _ = writeln!(s, r#"<g fill="{color}" fill-opacity="0.5">"#);
        for p in pts.iter() {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8"/>"#, p.x, p.y);
        }
        s.push_str("</g>\n");
    }
    s.push_str("<g fill=\"#1f77b4\">\n");
    for p in &o.landmarks {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, p.x, p.y);
    }
    s.push_str("</g>\n");

    let all = o.contour_spans.spans.iter().chain(&o.before_spans.spans).chain(&o.after_spans.spans);
    let lo = all.clone().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = all.map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { (w - 20.0) / (hi - lo) } else { 1.0 };
    let x = |v: f64| 10.0 + (v - lo) * scale;
    for (j, ((c, b), a)) in o
        .contour_spans
        .spans
        .iter()
        .zip(&o.before_spans.spans)
        .zip(&o.after_spans.spans)
        .enumerate()
    {
        let y = h + 10.0 + j as f64 * row;
        for (span, dy, color) in [(c, 0.0, "#333333"), (b, 4.0, "#d62728"), (a, 8.0, "#2ca02c")] {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="3" fill="{color}"/>"#,
                x(span.0),
                y + dy,
                (x(span.1) - x(span.0)).max(0.5)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "cmr", "spiral", "--mesh", "m.obj", "--vertex", "3", "--lengths", "8,16", "--max-ring", "2", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cli.seed, 7);
        match cli.command {
            Command::Spiral(a) => assert_eq!(a.lengths, Some(vec![8, 16])),
            _ => panic!(),
        }
    }

    #[test]
    fn inverted_deltas_are_a_config_error() {
        let cli = Cli::try_parse_from([
            "cmr", "register", "--scene", "x", "--delta1", "0.01", "--delta2", "0.02",
        ])
        .unwrap();
        let err = run(&cli).unwrap_err();
        assert_eq!(err.code(), "config.delta_order");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn toml_config_parses() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(
            &p,
            "[registration]\ndelta1 = 1.0\ndelta2 = 0.5\n[scene.noise]\nlandmark_sigma = 2.0\n[eval]\npck_steps = 10\n",
        )
        .unwrap();
        let c = FileConfig::load(&p).unwrap();
        assert_eq!(c.registration.unwrap().delta1, 1.0);
        assert_eq!(c.scene.noise.landmark_sigma, 2.0);
        assert_eq!(c.eval.pck_steps, 10);
        std::fs::write(&p, "[bogus]\n").unwrap();
        assert_eq!(FileConfig::load(&p).unwrap_err().code(), "io.parse");
    }
}
