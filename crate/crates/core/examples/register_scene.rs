//! Generate a synthetic hand scene, corrupt its landmarks and recover the
//! camera-space root with the adaptive 2D-1D registration.
//!
//! cargo run --example register_scene -- [seed] [shift_px]

use cmr::registration::{register, RegistrationConfig};
use cmr::synth::{generate_scene, NoiseModel, SceneSpec};

fn main() -> cmr::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let shift: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(30.0);

    let spec = SceneSpec {
        noise: NoiseModel {
            landmark_shift: shift,
            ..Default::default()
        },
        ..Default::default()
    };
    let scene = generate_scene(&spec, seed)?;
    let cfg = RegistrationConfig::hand();
    let r = register(&scene.mesh, &scene.regressor, &scene.intrinsics, &scene.landmarks, &scene.mask, &cfg)?;

    let err = |t: cmr::Vec3| (t - scene.root).norm() * 1000.0;
    println!("ground truth root  {:.4?}", scene.root.as_slice());
    println!("t2d  error {:8.2} mm", err(r.t2d.vector()));
    println!("t1d  error {:8.2} mm", err(r.t1d.vector()));
    println!("t*   error {:8.2} mm  (d = {:.1} mm, regime {:?})", err(r.t_star.vector()), r.d * 1000.0, r.regime);
    Ok(())
}
