//! Rings, disks and the truncated spiral sequence on an icosphere.

use cmr::geometry::mesh::icosphere;
use cmr::spiral::{build_spiral_index, spiral_sequence, MeshTopology, DEFAULT_RING_LENGTHS};

fn main() -> cmr::Result<()> {
    let mesh = icosphere(2);
    let topo = MeshTopology::new(&mesh);
    let v = 0;
    for k in 0..=3 {
        println!("{k}-ring: {:3} vertices, {k}-disk: {:3}", topo.k_ring(v, k)?.len(), topo.k_disk(v, k)?.len());
    }

    let rings = spiral_sequence(&mesh, v, 2)?;
    println!("untruncated spiral around {v}: {:?}", rings);

    let index = build_spiral_index(&mesh, 3, &DEFAULT_RING_LENGTHS)?;
    println!("length {} boundaries {:?}", index.length(), index.boundaries());
    println!("sequence of vertex 12: {:?}", index.sequence(12));
    Ok(())
}
