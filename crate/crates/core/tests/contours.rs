use cmr::silhouette::{extract_contour, make_axes, project_spans, SilhouetteMask};
use cmr::Vec2;
use proptest::prelude::*;

fn disk(r: f64, size: usize) -> SilhouetteMask {
    let c = (size / 2) as f64;
    SilhouetteMask::from_fn(size, size, |x, y| {
        let (dx, dy) = (x as f64 - c, y as f64 - c);
        dx * dx + dy * dy <= r * r
    })
}

/// Boundary pixels of a mask: foreground with a background 4-neighbour.
fn boundary_pixels(m: &SilhouetteMask) -> usize {
    let mut n = 0;
    for y in 0..m.height() {
        for x in 0..m.width() {
            let (xi, yi) = (x as i64, y as i64);
            if m.get(x, y) && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !m.get_signed(xi + dx, yi + dy)) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn disk_contour_matches_boundary_oracle() {
    let m = disk(20.0, 64);
    let c = extract_contour(&m).unwrap();
    // each boundary pixel of a convex blob is visited exactly once
    assert_eq!(c.len(), boundary_pixels(&m));
    let n = c.len();
    let length: f64 = (0..n).map(|i| (c.points[(i + 1) % n] - c.points[i]).norm()).sum();
    let circumference = 2.0 * std::f64::consts::PI * 20.0;
    assert!((length / circumference - 1.0).abs() <= 0.1, "{length} vs {circumference}");
}

#[test]
fn contour_is_closed_and_ccw() {
    let m = disk(9.5, 32);
    let c = extract_contour(&m).unwrap();
    assert!(c.signed_area2() < 0.0);
    let (a, b) = (c.points[0], c.points[c.len() - 1]);
    assert!((a - b).abs().max() <= 1.0, "last point is a neighbour of the first");
}

/// Gift-wrapping hull, used as an independent oracle.
fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let start = points.iter().copied().fold(points[0], |a, b| if (b.x, b.y) < (a.x, a.y) { b } else { a });
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = points[0];
        for &p in points {
            let cross = (next - current).perp(&(p - current));
            if next == current || cross < 0.0 || (cross == 0.0 && (p - current).norm() > (next - current).norm()) {
                next = p;
            }
        }
        if next == start || hull.len() > points.len() {
            break;
        }
        hull.push(next);
        current = next;
    }
    hull
}

proptest! {
    #[test]
    fn spans_translate_with_points(
        pts in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 1..40),
        d in (-50.0..50.0f64, -50.0..50.0f64),
        a in 2usize..16,
    ) {
        let p: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
        let d = Vec2::new(d.0, d.1);
        let moved: Vec<Vec2> = p.iter().map(|q| q + d).collect();
        let axes = make_axes(a).unwrap();
        let s0 = project_spans(&p, &axes).unwrap();
        let s1 = project_spans(&moved, &axes).unwrap();
        for ((lo0, hi0), ((lo1, hi1), ax)) in s0.spans.iter().zip(s1.spans.iter().zip(axes.axes())) {
            let shift = d.dot(ax);
            prop_assert!((lo1 - lo0 - shift).abs() < 1e-12 * (1.0 + lo0.abs() + shift.abs()) * 100.0);
            prop_assert!((hi1 - hi0 - shift).abs() < 1e-12 * (1.0 + hi0.abs() + shift.abs()) * 100.0);
            prop_assert!(lo0 <= hi0);
        }
    }

    #[test]
    fn spans_of_set_equal_spans_of_hull(
        pts in prop::collection::vec((-100i32..100, -100i32..100), 3..40),
        a in 2usize..16,
    ) {
        let p: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x as f64, y as f64)).collect();
        let hull = convex_hull(&p);
        let axes = make_axes(a).unwrap();
        let s = project_spans(&p, &axes).unwrap();
        let h = project_spans(&hull, &axes).unwrap();
        for (x, y) in s.spans.iter().zip(&h.spans) {
            prop_assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
        }
    }

    #[test]
    fn contour_points_lie_on_foreground_boundary(
        bits in prop::collection::vec(any::<bool>(), 144),
    ) {
        let m = SilhouetteMask::new(12, 12, bits).unwrap();
        if let Ok(c) = extract_contour(&m) {
            for p in &c.points {
                let (x, y) = (p.x as i64, p.y as i64);
                prop_assert!(m.get_signed(x, y));
                prop_assert!([(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !m.get_signed(x + dx, y + dy)));
            }
        }
    }
}
