//! Write a batch of seeded scenes in parallel, in the directory layout read
//! by `cmr register --scene`.

use cmr::synth::{generate_scene, MaskMethod, NoiseModel, SceneSpec};
use rayon::prelude::*;

fn main() -> cmr::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("cmr_synth_example"));
    let spec = SceneSpec {
        noise: NoiseModel {
            landmark_sigma: 1.5,
            mask_erode_fraction: 0.1,
            ..Default::default()
        },
        mask_method: MaskMethod::Splat { radius: 3, close: 2 },
        ..Default::default()
    };
    (100..108u64).into_par_iter().try_for_each(|seed| {
        let id = format!("scene_{seed:04}");
        generate_scene(&spec, seed)?.write(&out.join(&id), Some(id))
    })?;
    println!("8 scenes in {}", out.display());
    Ok(())
}
