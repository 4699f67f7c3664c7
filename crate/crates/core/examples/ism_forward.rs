//! SpiralConv++ and the Inception Spiral Module on random features, with the
//! weights written to and read back from a tensor bundle.

use cmr::geometry::mesh::icosphere;
use cmr::spiral::{build_spiral_index, ism_forward, spiralconv_forward, Affine, IsmWeights, TensorBundle, VertexFeatures};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-0.5..0.5))
}

fn main() -> cmr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mesh = icosphere(2);
    let index = build_spiral_index(&mesh, 3, &[6, 12, 18])?;
    let c_in = 4;
    let features = VertexFeatures::new(random(&mut rng, mesh.vertex_count(), c_in))?;

    let conv = Affine::new(random(&mut rng, 8, index.length() * c_in), DVector::zeros(8))?;
    let y = spiralconv_forward(&features, &index, &conv)?;
    println!("SpiralConv++: {} x {} -> {} x {}", mesh.vertex_count(), c_in, y.vertex_count(), y.channels());

    let widths = [4, 2, 2];
    let mut branches = vec![Affine::new(random(&mut rng, 8, index.disk_len(0) * c_in), DVector::zeros(8))?];
    for (i, w) in widths.into_iter().enumerate() {
        branches.push(Affine::new(random(&mut rng, w, index.disk_len(i + 1) * c_in), DVector::zeros(w))?);
    }
    let ism = IsmWeights::new(branches.try_into().expect("four branches"))?;

    let dir = std::env::temp_dir().join("cmr_ism_example");
    std::fs::create_dir_all(&dir).map_err(|e| cmr::Error::io(&dir, e))?;
    let manifest = dir.join("ism.json");
    ism.to_bundle().save(&manifest)?;
    let loaded = IsmWeights::from_bundle(&TensorBundle::load(&manifest)?)?;

    let out = ism_forward(&features, &index, &loaded)?;
    let direct = ism_forward(&features, &index, &ism)?;
    let gap = (out.matrix() - direct.matrix()).amax();
    println!("ISM: {} channels, float32 round-trip max deviation {gap:.2e}", out.channels());
    println!("bundle at {}", manifest.display());
    Ok(())
}
