//! Silhouette masks, contour tracing and 1D axis projections.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

/// Silhouette heatmap values at or above this become foreground.
pub const MASK_THRESHOLD: f64 = 0.5;

/// Binary `H x W` grid, row-major, `true` = inside the silhouette.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl SilhouetteMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} mask values for {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Loads a PGM or PNG; any non-zero pixel is foreground.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MaskNotFound(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        let img = image::load_from_memory(&bytes)?.to_luma8();
        let (w, h) = img.dimensions();
        Ok(Self {
            width: w as usize,
            height: h as usize,
            data: img.pixels().map(|p| p.0[0] != 0).collect(),
        })
    }

    /// Saves as PNG, or binary PGM when the extension is `.pgm`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let pixels: Vec<u8> = self.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
        let bytes = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
            out.extend(pixels);
            out
        } else {
            let mut out = Vec::new();
            let img = image::GrayImage::from_raw(self.width as u32, self.height as u32, pixels)
                .expect("buffer matches dimensions");
            img.write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)?;
            out
        };
        crate::io::write_atomic(path, &bytes)
    }

    fn disk_offsets(radius: usize) -> Vec<(i64, i64)> {
        let r = radius as i64;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    out.push((dx, dy));
                }
            }
        }
        out
    }

    /// Dilation by a disk of `radius` pixels.
    pub fn dilate(&self, radius: usize) -> Self {
        let offs = Self::disk_offsets(radius);
        Self::from_fn(self.width, self.height, |x, y| {
            offs.iter().any(|&(dx, dy)| self.get_signed(x as i64 + dx, y as i64 + dy))
        })
    }

    /// Erosion by a disk of `radius` pixels; outside the image is background.
    pub fn erode(&self, radius: usize) -> Self {
        let offs = Self::disk_offsets(radius);
        Self::from_fn(self.width, self.height, |x, y| {
            offs.iter().all(|&(dx, dy)| self.get_signed(x as i64 + dx, y as i64 + dy))
        })
    }

    pub fn close(&self, radius: usize) -> Self {
        self.dilate(radius).erode(radius)
    }

    /// Positive radius dilates, negative erodes.
    pub fn morph(&self, radius: i64) -> Self {
        match radius {
            r if r > 0 => self.dilate(r as usize),
            r if r < 0 => self.erode(r.unsigned_abs() as usize),
            _ => self.clone(),
        }
    }

    /// Erodes with the smallest disk that removes at least `fraction` of the
    /// foreground area.
    pub fn erode_fraction(&self, fraction: f64) -> Self {
        let area = self.foreground_count() as f64;
        let target = area * (1.0 - fraction.clamp(0.0, 1.0));
        if fraction <= 0.0 {
            return self.clone();
        }
        for r in 1..=self.width.max(self.height) {
            let e = self.erode(r);
            if e.foreground_count() as f64 <= target {
                return e;
            }
        }
        Self::empty(self.width, self.height)
    }

    /// Largest 4-connected foreground component (ties go to the one met first
    /// in raster order).
    pub fn largest_component(&self) -> Result<Self> {
        let mut label = vec![0u32; self.data.len()];
        let mut best: Option<(usize, u32)> = None;
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..self.data.len() {
            if !self.data[start] || label[start] != 0 {
                continue;
            }
            next += 1;
            label[start] = next;
            queue.push_back(start);
            let mut size = 0;
            while let Some(i) = queue.pop_front() {
                size += 1;
                let (x, y) = (i % self.width, i / self.width);
                let mut visit = |j: usize| {
                    if self.data[j] && label[j] == 0 {
                        label[j] = next;
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    visit(i - 1);
                }
                if x + 1 < self.width {
                    visit(i + 1);
                }
                if y > 0 {
                    visit(i - self.width);
                }
                if y + 1 < self.height {
                    visit(i + self.width);
                }
            }
            if best.is_none_or(|(s, _)| size > s) {
                best = Some((size, next));
            }
        }
        let (_, keep) = best.ok_or(Error::EmptyMask)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: label.iter().map(|&l| l == keep).collect(),
        })
    }
}

/// Fills every pixel whose centre lies inside any of the triangles. Pixel
/// `(x, y)` has its centre at integer coordinates.
pub fn rasterize_triangles(points: &[Vec2], faces: &[[usize; 3]], width: usize, height: usize) -> SilhouetteMask {
    let mut mask = SilhouetteMask::empty(width, height);
    for f in faces {
        let [a, b, c] = f.map(|i| points[i]);
        let area = (b - a).perp(&(c - a));
        if area == 0.0 {
            continue;
        }
        let lo_x = a.x.min(b.x).min(c.x).ceil().max(0.0);
        let hi_x = a.x.max(b.x).max(c.x).floor().min(width as f64 - 1.0);
        let lo_y = a.y.min(b.y).min(c.y).ceil().max(0.0);
        let hi_y = a.y.max(b.y).max(c.y).floor().min(height as f64 - 1.0);
        if lo_x > hi_x || lo_y > hi_y {
            continue;
        }
        let s = area.signum();
        for y in lo_y as usize..=hi_y as usize {
            for x in lo_x as usize..=hi_x as usize {
                let p = Vec2::new(x as f64, y as f64);
                let w0 = (b - a).perp(&(p - a)) * s;
                let w1 = (c - b).perp(&(p - b)) * s;
                let w2 = (a - c).perp(&(p - c)) * s;
                if w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0 {
                    mask.set(x, y, true);
                }
            }
        }
    }
    mask
}

/// Ordered closed boundary, at least 3 points.
///
/// `pixel_half_extent` is how far the true outline lies beyond the points:
/// 0.5 for contours traced from pixel masks (the points are boundary pixel
/// centres), 0 for exact point sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Vec2>,
    #[serde(default)]
    pub pixel_half_extent: f64,
}

impl Contour {
    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateContour(points.len()));
        }
        Ok(Self {
            points,
            pixel_half_extent: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Twice the signed shoelace area in raw pixel coordinates. Negative
    /// means counter-clockwise as displayed (y pointing down).
    pub fn signed_area2(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.points[i], self.points[(i + 1) % n]);
                p.x * q.y - q.x * p.y
            })
            .sum()
    }

    /// Spans of the contour along `axes`, widened by the pixel half extent.
    pub fn spans(&self, axes: &AxisSet) -> Result<SpanSet> {
        let mut s = project_spans(&self.points, axes)?;
        for span in &mut s.spans {
            span.0 -= self.pixel_half_extent;
            span.1 += self.pixel_half_extent;
        }
        Ok(s)
    }
}

// clockwise as displayed: W, NW, N, NE, E, SE, S, SW
const MOORE: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];

fn moore_dir(dx: i64, dy: i64) -> usize {
    MOORE.iter().position(|&d| d == (dx, dy)).expect("unit step")
}

/// Moore-neighbour trace of the outer boundary of the largest 4-connected
/// component, returned counter-clockwise as displayed.
pub fn extract_contour(mask: &SilhouetteMask) -> Result<Contour> {
    let comp = mask.largest_component()?;
    let w = comp.width;
    let first = comp.data.iter().position(|&b| b).ok_or(Error::EmptyMask)?;
    let start = ((first % w) as i64, (first / w) as i64);

    // returns the next boundary pixel and the new backtrack direction
    let step = |p: (i64, i64), back: usize| -> Option<((i64, i64), usize)> {
        for i in 1..=8 {
            let d = (back + i) % 8;
            let c = (p.0 + MOORE[d].0, p.1 + MOORE[d].1);
            if comp.get_signed(c.0, c.1) {
                let prev = (back + i - 1) % 8;
                let b = (p.0 + MOORE[prev].0, p.1 + MOORE[prev].1);
                return Some((c, moore_dir(b.0 - c.0, b.1 - c.1)));
            }
        }
        None
    };

    let mut points = vec![start];
    if let Some((second, mut back)) = step(start, 0) {
        let mut cur = second;
        // stop when leaving the start pixel towards the same second pixel again
        let limit = 4 * comp.data.len() + 8;
        loop {
            let (next, nb) = step(cur, back).expect("traced pixel has a foreground neighbour");
            if cur == start && next == second {
                break;
            }
            points.push(cur);
            cur = next;
            back = nb;
            if points.len() > limit {
                break;
            }
        }
    }
    let mut contour = Contour {
        points: points.into_iter().map(|(x, y)| Vec2::new(x as f64, y as f64)).collect(),
        pixel_half_extent: 0.5,
    };
    if contour.points.len() < 3 {
        return Err(Error::DegenerateContour(contour.points.len()));
    }
    if contour.signed_area2() > 0.0 {
        contour.points.reverse();
    }
    Ok(contour)
}

/// `A` unit axes at angles `j * pi / A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSet {
    axes: Vec<Vec2>,
}

impl AxisSet {
    pub fn axes(&self) -> &[Vec2] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }
}

pub fn make_axes(count: usize) -> Result<AxisSet> {
    if count < 2 {
        return Err(Error::InvalidAxisCount(count));
    }
    let step = std::f64::consts::PI / count as f64;
    Ok(AxisSet {
        axes: (0..count)
            .map(|j| {
                let a = j as f64 * step;
                Vec2::new(a.cos(), a.sin())
            })
            .collect(),
    })
}

/// Per-axis `(min, max)` of projected values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanSet {
    pub spans: Vec<(f64, f64)>,
}

impl SpanSet {
    /// Root-mean-square of the endpoint differences to `other`.
    pub fn rms_gap(&self, other: &SpanSet) -> f64 {
        let n = (2 * self.spans.len()).max(1) as f64;
        let ss: f64 = self
            .spans
            .iter()
            .zip(&other.spans)
            .map(|(a, b)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2))
            .sum();
        (ss / n).sqrt()
    }
}

pub fn project_spans(points: &[Vec2], axes: &AxisSet) -> Result<SpanSet> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok(SpanSet {
        spans: axes
            .axes
            .iter()
            .map(|a| {
                points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let v = p.dot(a);
                    (lo.min(v), hi.max(v))
                })
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(size: usize, at: usize, canvas: usize) -> SilhouetteMask {
        SilhouetteMask::from_fn(canvas, canvas, |x, y| {
            (at..at + size).contains(&x) && (at..at + size).contains(&y)
        })
    }

    #[test]
    fn square_boundary_has_36_pixels() {
        let c = extract_contour(&square(10, 0, 10)).unwrap();
        assert_eq!(c.len(), 36);
        let c = extract_contour(&square(10, 5, 20)).unwrap();
        assert_eq!(c.len(), 36);
        assert!(c.signed_area2() < 0.0);
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let mut m = SilhouetteMask::empty(5, 5);
        m.set(2, 2, true);
        assert!(matches!(extract_contour(&m), Err(Error::DegenerateContour(1))));
    }

    #[test]
    fn empty_mask() {
        assert!(matches!(extract_contour(&SilhouetteMask::empty(4, 4)), Err(Error::EmptyMask)));
    }

    #[test]
    fn picks_largest_component() {
        let m = SilhouetteMask::from_fn(30, 30, |x, y| (x < 3 && y < 3) || ((10..20).contains(&x) && (10..20).contains(&y)));
        let c = extract_contour(&m).unwrap();
        assert_eq!(c.len(), 36);
        assert!(c.points.iter().all(|p| p.x >= 10.0));
    }

    #[test]
    fn diagonal_touching_component_is_not_followed() {
        // two squares touching at a corner are separate 4-components
        let m = SilhouetteMask::from_fn(20, 20, |x, y| (x < 5 && y < 5) || ((5..8).contains(&x) && (5..8).contains(&y)));
        let c = extract_contour(&m).unwrap();
        assert_eq!(c.len(), 16);
    }

    #[test]
    fn contour_points_touch_background() {
        let m = SilhouetteMask::from_fn(40, 40, |x, y| {
            let (dx, dy) = (x as f64 - 20.0, y as f64 - 18.0);
            dx * dx / 150.0 + dy * dy / 60.0 <= 1.0 || (x > 18 && x < 22 && y > 20 && y < 37)
        });
        let c = extract_contour(&m).unwrap();
        for p in &c.points {
            let (x, y) = (p.x as i64, p.y as i64);
            assert!(m.get_signed(x, y));
            let bg = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| !m.get_signed(x + dx, y + dy));
            assert!(bg, "({x}, {y}) is interior");
        }
        // consecutive points are 8-neighbours, including the wrap-around
        for i in 0..c.len() {
            let d = c.points[(i + 1) % c.len()] - c.points[i];
            assert!(d.x.abs() <= 1.0 && d.y.abs() <= 1.0 && d.norm() > 0.0);
        }
    }

    #[test]
    fn axes() {
        let a = make_axes(2).unwrap();
        assert!((a.axes()[0] - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!((a.axes()[1] - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        let a = make_axes(4).unwrap();
        let deg: Vec<f64> = a.axes().iter().map(|v| v.y.atan2(v.x).to_degrees()).collect();
        for (d, e) in deg.iter().zip([0.0, 45.0, 90.0, 135.0]) {
            assert!((d - e).abs() < 1e-9);
        }
        let a = make_axes(12).unwrap();
        assert_eq!(a.len(), 12);
        assert!(a.axes().iter().all(|v| (v.norm() - 1.0).abs() < 1e-9));
        assert!(matches!(make_axes(1), Err(Error::InvalidAxisCount(1))));
    }

    #[test]
    fn spans_of_unit_square() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        let s = project_spans(&pts, &make_axes(4).unwrap()).unwrap();
        assert_eq!(s.spans[0], (0.0, 1.0));
        assert!((s.spans[1].0).abs() < 1e-15 && (s.spans[1].1 - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(project_spans(&[], &make_axes(2).unwrap()), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn contour_spans_include_half_pixel() {
        let c = extract_contour(&square(10, 5, 20)).unwrap();
        let s = c.spans(&make_axes(2).unwrap()).unwrap();
        assert_eq!(s.spans[0], (4.5, 14.5));
    }

    #[test]
    fn rasterized_square_covers_pixel_centres() {
        let pts = [Vec2::new(1.5, 1.5), Vec2::new(5.5, 1.5), Vec2::new(5.5, 4.5), Vec2::new(1.5, 4.5)];
        let m = rasterize_triangles(&pts, &[[0, 1, 2], [0, 2, 3]], 8, 8);
        assert_eq!(m.foreground_count(), 4 * 3);
        assert!(m.get(2, 2) && m.get(5, 4) && !m.get(1, 2) && !m.get(6, 2));
        // winding does not matter
        let m2 = rasterize_triangles(&pts, &[[0, 2, 1], [0, 3, 2]], 8, 8);
        assert_eq!(m, m2);
    }

    #[test]
    fn morphology() {
        let m = square(10, 5, 20);
        assert_eq!(m.erode(1).foreground_count(), 64);
        assert_eq!(m.dilate(1).foreground_count(), 100 + 40);
        let mut holed = m.clone();
        holed.set(9, 9, false);
        assert_eq!(holed.close(1), m);
        assert_eq!(m.morph(0), m);
        let e = m.erode_fraction(0.2);
        assert!(e.foreground_count() <= 80);
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = square(4, 2, 9);
        for name in ["m.png", "m.pgm"] {
            let p = dir.path().join(name);
            m.save(&p).unwrap();
            assert_eq!(SilhouetteMask::load(&p).unwrap(), m);
        }
    }
}
