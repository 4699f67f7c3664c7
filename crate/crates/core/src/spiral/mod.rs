//! Spiral neighbourhoods on triangle meshes and the operators built on them.

mod ops;
mod topology;

pub use ops::{ism_forward, spiralconv_forward, Affine, IsmWeights, TensorBundle, VertexFeatures};
pub use topology::{
    build_spiral_index, k_disk, k_ring, spiral_sequence, vertex_adjacency, MeshTopology, SpiralIndex,
    DEFAULT_RING_LENGTHS,
};
