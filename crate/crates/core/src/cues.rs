//! 2D cues: Gaussian joint heatmaps, silhouette heatmaps and their
//! cat / sum / group aggregation.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Landmarks2D;

pub const DEFAULT_RESOLUTION: (usize, usize) = (64, 64);
pub const DEFAULT_SIGMA: f64 = 2.5;

/// Channel-major stack of `H x W` maps with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStack {
    height: usize,
    width: usize,
    labels: Vec<String>,
    data: Vec<f64>,
}

impl HeatmapStack {
    pub fn new(height: usize, width: usize, labels: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if data.len() != labels.len() * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} channels of {height}x{width}",
                data.len(),
                labels.len()
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::ShapeMismatch("heatmap values must lie in [0, 1]".into()));
        }
        Ok(Self {
            height,
            width,
            labels,
            data,
        })
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn channels(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.channel(c)[y * self.width + x]
    }

    /// Writes every channel as an 8-bit binary PGM named `<prefix>_<cc>_<label>.pgm`.
    pub fn export_pgm(&self, dir: &Path, prefix: &str) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::with_capacity(self.channels());
        for (c, label) in self.labels.iter().enumerate() {
            let safe: String = label
                .chars()
                .map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' })
                .collect();
            let path = dir.join(format!("{prefix}_{c:02}_{safe}.pgm"));
            let mut bytes = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
            bytes.extend(self.channel(c).iter().map(|v| (v * 255.0).round() as u8));
            crate::io::write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }

    /// Thresholded foreground of channel `c`.
    pub fn to_mask(&self, c: usize, threshold: f64) -> crate::silhouette::SilhouetteMask {
        crate::silhouette::SilhouetteMask::from_fn(self.width, self.height, |x, y| self.get(c, y, x) >= threshold)
    }
}

/// One unnormalized Gaussian per landmark, peak 1 at the landmark.
/// Pixel `(x, y)` has its centre at integer coordinates.
pub fn render_gaussian_heatmaps(landmarks: &Landmarks2D, resolution: (usize, usize), sigma: f64) -> Result<HeatmapStack> {
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    let (h, w) = resolution;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut data = Vec::with_capacity(landmarks.len() * h * w);
    for p in &landmarks.points {
        for y in 0..h {
            let dy = y as f64 - p.y;
            for x in 0..w {
                let dx = x as f64 - p.x;
                data.push((-(dx * dx + dy * dy) * inv).exp());
            }
        }
    }
    let labels = (0..landmarks.len()).map(|i| format!("joint_{i}")).collect();
    HeatmapStack::new(h, w, labels, data)
}

fn clamped_sum<'a>(maps: impl Iterator<Item = &'a [f64]>, n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for m in maps {
        for (a, v) in acc.iter_mut().zip(m) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a = a.min(1.0);
    }
    acc
}

/// Pixel-wise sum of all channels, clamped to 1.
pub fn aggregate_sum(stack: &HeatmapStack) -> Result<HeatmapStack> {
    if stack.channels() == 0 {
        return Err(Error::EmptyInput);
    }
    let n = stack.height * stack.width;
    let data = clamped_sum((0..stack.channels()).map(|c| stack.channel(c)), n);
    HeatmapStack::new(stack.height, stack.width, vec!["sum".into()], data)
}

/// Channel-wise concatenation `[pose, sil]`.
pub fn aggregate_cat(pose: &HeatmapStack, sil: &HeatmapStack) -> Result<HeatmapStack> {
    if pose.resolution() != sil.resolution() {
        return Err(Error::ResolutionMismatch(pose.resolution(), sil.resolution()));
    }
    let mut labels = pose.labels.clone();
    labels.extend(sil.labels.iter().cloned());
    let mut data = pose.data.clone();
    data.extend_from_slice(&sil.data);
    Ok(HeatmapStack {
        height: pose.height,
        width: pose.width,
        labels,
        data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Part,
    Level,
    Tip,
}

/// Named joint groups; each group becomes one summed channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingScheme {
    pub kind: SchemeKind,
    pub groups: IndexMap<String, Vec<usize>>,
}

impl GroupingScheme {
    pub fn new(kind: SchemeKind, groups: IndexMap<String, Vec<usize>>) -> Result<Self> {
        let s = Self { kind, groups };
        s.check_shape()?;
        Ok(s)
    }

    fn check_shape(&self) -> Result<()> {
        for (name, g) in &self.groups {
            if g.is_empty() {
                return Err(Error::InvalidGrouping(format!("group '{name}' is empty")));
            }
            if self.kind == SchemeKind::Tip && g.len() != 2 {
                return Err(Error::InvalidGrouping(format!(
                    "tip group '{name}' must pair exactly two joints, has {}",
                    g.len()
                )));
            }
        }
        Ok(())
    }

    /// Checks group membership against `joint_count` joints.
    pub fn validate(&self, joint_count: usize) -> Result<()> {
        self.check_shape()?;
        for (name, g) in &self.groups {
            if let Some(&index) = g.iter().find(|&&i| i >= joint_count) {
                return Err(Error::InvalidGroupIndex {
                    group: name.clone(),
                    index,
                    count: joint_count,
                });
            }
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let s: Self = crate::io::read_json(path.as_ref())?;
        s.check_shape()?;
        Ok(s)
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            SchemeKind::Part => "part",
            SchemeKind::Level => "level",
            SchemeKind::Tip => "tip",
        }
    }

    /// All unordered pairs of `tips`, named `<a>-<b>`.
    pub fn tip_pairs(tips: &[(&str, usize)]) -> Self {
        let mut groups = IndexMap::new();
        for (i, &(na, a)) in tips.iter().enumerate() {
            for &(nb, b) in &tips[i + 1..] {
                groups.insert(format!("{na}-{nb}"), vec![a, b]);
            }
        }
        Self {
            kind: SchemeKind::Tip,
            groups,
        }
    }
}

fn scheme(kind: SchemeKind, groups: &[(&str, &[usize])]) -> GroupingScheme {
    GroupingScheme {
        kind,
        groups: groups.iter().map(|(n, g)| (n.to_string(), g.to_vec())).collect(),
    }
}

/// Default tables for the 21-joint hand: wrist = 0, then MCP, PIP, DIP, TIP
/// for thumb, index, middle, ring and little finger.
pub mod hand {
    use super::*;

    pub const FINGERS: [&str; 5] = ["thumb", "index", "middle", "ring", "little"];

    pub fn part() -> GroupingScheme {
        let groups: Vec<(String, Vec<usize>)> = FINGERS
            .iter()
            .enumerate()
            .map(|(f, name)| {
                let base = 1 + 4 * f;
                (name.to_string(), vec![0, base, base + 1, base + 2, base + 3])
            })
            .collect();
        GroupingScheme {
            kind: SchemeKind::Part,
            groups: groups.into_iter().collect(),
        }
    }

    pub fn level() -> GroupingScheme {
        let mut groups = IndexMap::new();
        groups.insert("wrist".to_string(), vec![0]);
        for (l, name) in ["mcp", "pip", "dip", "tip"].iter().enumerate() {
            groups.insert(name.to_string(), (0..5).map(|f| 1 + 4 * f + l).collect());
        }
        GroupingScheme {
            kind: SchemeKind::Level,
            groups,
        }
    }

    pub fn tip() -> GroupingScheme {
        let tips: Vec<(&str, usize)> = FINGERS.iter().enumerate().map(|(f, &n)| (n, 4 + 4 * f)).collect();
        GroupingScheme::tip_pairs(&tips)
    }
}

/// Default tables for the 24-joint SMPL body.
pub mod body {
    use super::*;

    pub const PARENTS: [i32; 24] = [-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21];

    pub fn part() -> GroupingScheme {
        scheme(
            SchemeKind::Part,
            &[
                ("torso", &[0, 3, 6, 9, 12, 15]),
                ("left_leg", &[1, 4, 7, 10]),
                ("right_leg", &[2, 5, 8, 11]),
                ("left_arm", &[13, 16, 18, 20, 22]),
                ("right_arm", &[14, 17, 19, 21, 23]),
            ],
        )
    }

    /// One group per kinematic depth below the pelvis.
    pub fn level() -> GroupingScheme {
        let mut depth = [0usize; 24];
        for j in 1..24 {
            depth[j] = depth[PARENTS[j] as usize] + 1;
        }
        let mut groups: IndexMap<String, Vec<usize>> = IndexMap::new();
        for d in 0..=*depth.iter().max().expect("non-empty") {
            groups.insert(format!("depth_{d}"), (0..24).filter(|&j| depth[j] == d).collect());
        }
        GroupingScheme {
            kind: SchemeKind::Level,
            groups,
        }
    }

    pub fn tip() -> GroupingScheme {
        GroupingScheme::tip_pairs(&[
            ("head", 15),
            ("left_hand", 22),
            ("right_hand", 23),
            ("left_foot", 10),
            ("right_foot", 11),
        ])
    }
}

/// Original channels followed by one clamped-sum channel per group of every
/// scheme.
pub fn aggregate_group(stack: &HeatmapStack, schemes: &[GroupingScheme]) -> Result<HeatmapStack> {
    for s in schemes {
        s.validate(stack.channels())?;
    }
    let n = stack.height * stack.width;
    let mut labels = stack.labels.clone();
    let mut data = stack.data.clone();
    for s in schemes {
        for (name, g) in &s.groups {
            labels.push(format!("{}:{name}", s.kind_name()));
            data.extend(clamped_sum(g.iter().map(|&c| stack.channel(c)), n));
        }
    }
    Ok(HeatmapStack {
        height: stack.height,
        width: stack.width,
        labels,
        data,
    })
}
