//! Joint heatmaps of a synthetic hand and the sum / cat / group aggregations.
//! Channels are written as PGM images.

use cmr::cues::{aggregate_cat, aggregate_group, aggregate_sum, hand, render_gaussian_heatmaps, HeatmapStack};
use cmr::geometry::Landmarks2D;
use cmr::synth::{generate_scene, SceneSpec};
use cmr::Vec2;

fn main() -> cmr::Result<()> {
    let scene = generate_scene(&SceneSpec::default(), 3)?;
    // 512 px image down to a 64 px heatmap grid
    let s = 64.0 / scene.width as f64;
    let points: Vec<Vec2> = scene.landmarks.points.iter().map(|p| p * s).collect();
    let pose = render_gaussian_heatmaps(&Landmarks2D::new(points)?, (64, 64), 2.5)?;

    let sil_values: Vec<f64> = (0..64 * 64)
        .map(|i| {
            let (x, y) = (i % 64, i / 64);
            scene.mask.get((x as f64 / s) as usize, (y as f64 / s) as usize) as u8 as f64
        })
        .collect();
    let sil = HeatmapStack::new(64, 64, vec!["silhouette".into()], sil_values)?;

    let sum = aggregate_sum(&pose)?;
    let cat = aggregate_cat(&pose, &sil)?;
    let grouped = aggregate_group(&pose, &[hand::part(), hand::tip()])?;
    println!("pose {} ch, sum {} ch, cat {} ch, part+tip {} ch", pose.channels(), sum.channels(), cat.channels(), grouped.channels());
    println!("group labels: {:?}", &grouped.labels()[21..]);

    let dir = std::env::temp_dir().join("cmr_cues_example");
    std::fs::create_dir_all(&dir).map_err(|e| cmr::Error::io(&dir, e))?;
    let files = sum.export_pgm(&dir, "sum")?;
    let more = cat.export_pgm(&dir, "cat")?;
    println!("wrote {} images to {}", files.len() + more.len(), dir.display());
    Ok(())
}
