//! Contour of a synthetic silhouette and its 1D spans compared with the
//! spans of the projected mesh.

use cmr::silhouette::{extract_contour, make_axes, project_spans};
use cmr::synth::{generate_scene, SceneSpec};

fn main() -> cmr::Result<()> {
    let scene = generate_scene(&SceneSpec::default(), 21)?;
    let contour = extract_contour(&scene.mask)?;
    println!("mask {} px foreground, contour {} points", scene.mask.foreground_count(), contour.len());

    let axes = make_axes(12)?;
    let from_mask = contour.spans(&axes)?;
    let from_mesh = project_spans(&scene.projected_vertices(), &axes)?;
    for (i, (a, (m, v))) in axes.axes().iter().zip(from_mask.spans.iter().zip(&from_mesh.spans)).enumerate() {
        println!(
            "axis {i:2} ({:+.3}, {:+.3}): contour [{:7.2}, {:7.2}]  mesh [{:7.2}, {:7.2}]",
            a.x, a.y, m.0, m.1, v.0, v.1
        );
    }
    println!("rms span gap {:.3} px", from_mask.rms_gap(&from_mesh));
    Ok(())
}
