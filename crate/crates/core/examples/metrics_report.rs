//! Metric report over noisy predictions, saved as CSV and JSON.

use cmr::metrics::{build_report, default_thresholds, PoseSample};
use cmr::synth::{generate_scene, SceneSpec};
use cmr::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> cmr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 0.004).expect("valid sigma");
    let mut pairs = Vec::new();
    for seed in 0..8 {
        let scene = generate_scene(&SceneSpec::default(), seed)?;
        let gt = PoseSample {
            id: None,
            joints: scene.joints_cs(),
            vertices: Some(scene.vertices_cs()),
        };
        let offset = Vec3::new(0.0, 0.0, 0.01 * seed as f64);
        let jitter = |p: &Vec3| p + offset + Vec3::from_fn(|_, _| noise.sample(&mut rng));
        let pred = PoseSample {
            id: None,
            joints: gt.joints.iter().map(jitter).collect(),
            vertices: gt.vertices.as_ref().map(|v| v.iter().map(|p| p + offset).collect()),
        };
        pairs.push((format!("scene_{seed:04}"), pred, gt));
    }
    let report = build_report(&pairs, 0, &default_thresholds())?;
    for (k, v) in &report.mean {
        println!("{k:>9}: {v:8.3} mm");
    }
    println!("      auc: {:.4}", report.auc);

    let dir = std::env::temp_dir().join("cmr_metrics_example");
    std::fs::create_dir_all(&dir).map_err(|e| cmr::Error::io(&dir, e))?;
    report.save(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
