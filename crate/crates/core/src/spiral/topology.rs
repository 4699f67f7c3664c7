use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

/// Default per-ring truncation lengths for rings 1, 2 and 3.
pub const DEFAULT_RING_LENGTHS: [usize; 3] = [8, 16, 24];

/// Sorted unique edge neighbours of every vertex.
pub fn vertex_adjacency(mesh: &TriangleMesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.vertex_count()];
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for n in &mut adj {
        n.sort_unstable();
        n.dedup();
    }
    adj
}

/// Rings `0..=k` around `v` by breadth-first expansion.
fn rings(adjacency: &[Vec<usize>], v: usize, k: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adjacency.len()];
    seen[v] = true;
    let mut rings = vec![vec![v]];
    for _ in 0..k {
        let mut next = Vec::new();
        for &u in rings.last().expect("ring 0 exists") {
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        rings.push(next);
    }
    rings
}

/// Precomputed adjacency for repeated ring and disk queries.
#[derive(Debug, Clone)]
pub struct MeshTopology {
    adjacency: Vec<Vec<usize>>,
}

impl MeshTopology {
    pub fn new(mesh: &TriangleMesh) -> Self {
        Self {
            adjacency: vertex_adjacency(mesh),
        }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.adjacency.len() {
            return Err(Error::VertexOutOfRange {
                index: v,
                count: self.adjacency.len(),
            });
        }
        Ok(())
    }

    /// `0-ring = {v}`, `(k+1)-ring = N(k-ring) \ k-disk`. Sorted.
    pub fn k_ring(&self, v: usize, k: usize) -> Result<Vec<usize>> {
        self.check(v)?;
        let mut ring = rings(&self.adjacency, v, k)
            .pop()
            .expect("k+1 rings");
        ring.sort_unstable();
        Ok(ring)
    }

    /// Union of rings `0..=k`. Sorted.
    pub fn k_disk(&self, v: usize, k: usize) -> Result<Vec<usize>> {
        self.check(v)?;
        let mut disk: Vec<usize> = rings(&self.adjacency, v, k)
            .into_iter()
            .flatten()
            .collect();
        disk.sort_unstable();
        Ok(disk)
    }
}

pub fn k_ring(mesh: &TriangleMesh, v: usize, k: usize) -> Result<Vec<usize>> {
    MeshTopology::new(mesh).k_ring(v, k)
}

pub fn k_disk(mesh: &TriangleMesh, v: usize, k: usize) -> Result<Vec<usize>> {
    MeshTopology::new(mesh).k_disk(v, k)
}

/// Neighbours of every vertex ordered by walking its face fan
/// counter-clockwise (with respect to face winding).
///
/// Closed fans start at the smallest neighbour index; open fans start at the
/// fan endpoint from which the counter-clockwise walk covers the whole fan.
/// `None` marks a vertex whose 1-ring is not a single fan.
pub(crate) fn fan_orders(mesh: &TriangleMesh) -> Vec<Option<Vec<usize>>> {
    let n = mesh.vertex_count();
    // successor map around each vertex: in face (v, a, b), b follows a
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for f in mesh.faces() {
        for k in 0..3 {
            succ[f[k]].push((f[(k + 1) % 3], f[(k + 2) % 3]));
        }
    }
    succ.into_iter().map(|pairs| order_fan(&pairs)).collect()
}

fn order_fan(pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
    if pairs.is_empty() {
        return Some(Vec::new());
    }
    let mut next: HashMap<usize, usize> = HashMap::with_capacity(pairs.len());
    let mut pred_count: HashMap<usize, usize> = HashMap::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if next.insert(a, b).is_some() {
            return None;
        }
        *pred_count.entry(b).or_default() += 1;
    }
    if pred_count.values().any(|&c| c > 1) {
        return None;
    }
    let mut neighbors: Vec<usize> = next.keys().chain(pred_count.keys()).copied().collect();
    neighbors.sort_unstable();
    neighbors.dedup();
    let starts: Vec<usize> = neighbors
        .iter()
        .copied()
        .filter(|u| !pred_count.contains_key(u))
        .collect();
    let start = match starts.as_slice() {
        [] => neighbors[0],
        [s] => *s,
        _ => return None,
    };
    let mut order = Vec::with_capacity(neighbors.len());
    let mut cur = start;
    loop {
        order.push(cur);
        match next.get(&cur) {
            Some(&nx) if nx != start => cur = nx,
            _ => break,
        }
    }
    if order.len() != neighbors.len() {
        // several disjoint fans around the same vertex
        return None;
    }
    Some(order)
}

/// Fixed-length spiral neighbourhood sequences for every vertex.
///
/// `sequences[v][..boundaries[0]]` is the 0-ring (`[v]`),
/// `sequences[v][boundaries[i-1]..boundaries[i]]` the truncated or padded
/// i-ring. The prefix up to `boundaries[i]` is the i-disk prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpiralIndex")]
pub struct SpiralIndex {
    length: usize,
    boundaries: Vec<usize>,
    sequences: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawSpiralIndex {
    length: usize,
    boundaries: Vec<usize>,
    sequences: Vec<Vec<usize>>,
}

impl TryFrom<RawSpiralIndex> for SpiralIndex {
    type Error = Error;

    fn try_from(r: RawSpiralIndex) -> Result<Self> {
        SpiralIndex::from_parts(r.length, r.boundaries, r.sequences)
    }
}

impl SpiralIndex {
    pub fn from_parts(length: usize, boundaries: Vec<usize>, sequences: Vec<Vec<usize>>) -> Result<Self> {
        let bad = |m: String| Err(Error::ShapeMismatch(m));
        if boundaries.first() != Some(&1) || boundaries.last() != Some(&length) {
            return bad(format!(
                "boundaries {boundaries:?} must start at 1 and end at the length {length}"
            ));
        }
        if boundaries.windows(2).any(|w| w[0] > w[1]) {
            return bad("boundaries must be non-decreasing".into());
        }
        let n = sequences.len();
        for (v, s) in sequences.iter().enumerate() {
            if s.len() != length {
                return bad(format!("sequence {v} has length {}, expected {length}", s.len()));
            }
            if s[0] != v {
                return bad(format!("sequence {v} does not start at its own vertex"));
            }
            if let Some(&i) = s.iter().find(|&&i| i >= n) {
                return Err(Error::VertexOutOfRange { index: i, count: n });
            }
        }
        Ok(Self {
            length,
            boundaries,
            sequences,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn vertex_count(&self) -> usize {
        self.sequences.len()
    }

    pub fn max_ring(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn sequence(&self, v: usize) -> &[usize] {
        &self.sequences[v]
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    /// Length of the i-disk prefix.
    pub fn disk_len(&self, ring: usize) -> usize {
        self.boundaries[ring]
    }

    /// Keeps only the first `len` entries of every sequence (rings whose
    /// boundary lies past `len` are dropped).
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let mut boundaries: Vec<usize> = self.boundaries.iter().copied().filter(|&b| b < len).collect();
        boundaries.push(len.min(self.length));
        let len = *boundaries.last().expect("non-empty");
        Self::from_parts(
            len,
            boundaries,
            self.sequences.iter().map(|s| s[..len].to_vec()).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spiral index serializes")
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path.as_ref())
    }
}

/// Builds the spiral index over rings `0..=max_ring`.
///
/// `lengths[k-1]` is the segment length kept for ring `k`; longer rings are
/// truncated, shorter ones padded by repeating their last valid vertex.
pub fn build_spiral_index(mesh: &TriangleMesh, max_ring: usize, lengths: &[usize]) -> Result<SpiralIndex> {
    if lengths.len() != max_ring {
        return Err(Error::Config(format!(
            "{} ring lengths given for max_ring {max_ring}",
            lengths.len()
        )));
    }
    if lengths.contains(&0) {
        return Err(Error::Config("ring lengths must be positive".into()));
    }
    let fans = fan_orders(mesh);
    let n = mesh.vertex_count();
    let mut boundaries = Vec::with_capacity(max_ring + 1);
    let mut acc = 1;
    boundaries.push(acc);
    for &l in lengths {
        acc += l;
        boundaries.push(acc);
    }
    let length = acc;

    let mut sequences = Vec::with_capacity(n);
    for v in 0..n {
        let rings = spiral_rings(&fans, v, max_ring)?;
        let mut seq = Vec::with_capacity(length);
        seq.push(v);
        for (ring, &len) in rings[1..].iter().zip(lengths) {
            let pad = ring.last().copied().unwrap_or(*seq.last().expect("seq starts with v"));
            seq.extend(ring.iter().copied().take(len));
            seq.resize(seq.len() + len.saturating_sub(ring.len()), pad);
        }
        sequences.push(seq);
    }
    Ok(SpiralIndex {
        length,
        boundaries,
        sequences,
    })
}

/// Untruncated spiral rings around `v` (ring 0 first). Every vertex whose
/// fan is walked must be manifold.
fn spiral_rings(fans: &[Option<Vec<usize>>], v: usize, max_ring: usize) -> Result<Vec<Vec<usize>>> {
    let mut seen = HashSet::from([v]);
    let mut rings = vec![vec![v]];
    for _ in 0..max_ring {
        let mut next = Vec::new();
        for &u in rings.last().expect("ring 0 exists") {
            let fan = fans[u].as_ref().ok_or(Error::NonManifoldVertex(u))?;
            for &w in fan {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        rings.push(next);
    }
    Ok(rings)
}

/// Full spiral over rings `0..=max_ring` with no truncation, i.e. each ring at
/// its natural size. Used for inspection and tests.
pub fn spiral_sequence(mesh: &TriangleMesh, v: usize, max_ring: usize) -> Result<Vec<Vec<usize>>> {
    if v >= mesh.vertex_count() {
        return Err(Error::VertexOutOfRange {
            index: v,
            count: mesh.vertex_count(),
        });
    }
    spiral_rings(&fan_orders(mesh), v, max_ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{grid, icosahedron, icosphere, tetrahedron};
    use crate::Vec3;
    use std::collections::VecDeque;

    fn bfs(adj: &[Vec<usize>], v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; adj.len()];
        dist[v] = 0;
        let mut q = VecDeque::from([v]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    #[test]
    fn adjacency_counts() {
        assert!(vertex_adjacency(&tetrahedron()).iter().all(|n| n.len() == 3));
        assert!(vertex_adjacency(&icosahedron()).iter().all(|n| n.len() == 5));
        let tri = TriangleMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        assert_eq!(vertex_adjacency(&tri), vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn rings_on_tetrahedron() {
        let t = tetrahedron();
        assert_eq!(k_ring(&t, 2, 0).unwrap(), vec![2]);
        assert_eq!(k_ring(&t, 0, 1).unwrap(), vec![1, 2, 3]);
        assert!(k_ring(&t, 0, 2).unwrap().is_empty());
        assert_eq!(k_disk(&t, 0, 0).unwrap(), vec![0]);
        assert_eq!(k_disk(&t, 0, 1).unwrap(), vec![0, 1, 2, 3]);
        assert!(k_ring(&t, 9, 1).is_err());
    }

    #[test]
    fn grid_ring_matches_bfs_frontier() {
        let g = grid(10, 10, 1.0);
        let topo = MeshTopology::new(&g);
        let adj = vertex_adjacency(&g);
        let v = 4 * 10 + 5;
        let dist = bfs(&adj, v);
        for k in 0..5 {
            let expect: Vec<usize> = (0..100).filter(|&u| dist[u] == k).collect();
            assert_eq!(topo.k_ring(v, k).unwrap(), expect, "k={k}");
            let disk: Vec<usize> = (0..100).filter(|&u| dist[u] <= k).collect();
            assert_eq!(topo.k_disk(v, k).unwrap(), disk);
        }
    }

    #[test]
    fn tetrahedron_spiral() {
        let idx = build_spiral_index(&tetrahedron(), 1, &[3]).unwrap();
        assert_eq!(idx.length(), 4);
        assert_eq!(idx.boundaries(), &[1, 4]);
        let s = idx.sequence(0);
        assert_eq!(s[0], 0);
        let mut rest = s[1..].to_vec();
        rest.sort_unstable();
        assert_eq!(rest, vec![1, 2, 3]);
        // smallest neighbour first, then counter-clockwise
        assert_eq!(s, &[0, 1, 2, 3]);
    }

    #[test]
    fn fan_is_counter_clockwise() {
        // interior vertex of a flat grid: check the walk turns left around it
        let g = grid(5, 5, 1.0);
        let v = 12;
        let seq = spiral_sequence(&g, v, 1).unwrap();
        let ring = &seq[1];
        assert_eq!(ring.len(), 6);
        assert_eq!(ring[0], *vertex_adjacency(&g)[v].iter().min().unwrap());
        let c = g.vertices()[v];
        for w in ring.windows(2) {
            let a = g.vertices()[w[0]] - c;
            let b = g.vertices()[w[1]] - c;
            assert!(a.cross(&b).z > 0.0);
        }
    }

    #[test]
    fn truncation_and_padding() {
        let g = grid(5, 5, 1.0);
        // interior vertex 12 has degree 6
        let idx = build_spiral_index(&g, 1, &[4]).unwrap();
        let full = spiral_sequence(&g, 12, 1).unwrap();
        assert_eq!(&idx.sequence(12)[1..], &full[1][..4]);
        // corner vertex 0 has degree 3 (neighbours 1, 5, 6)
        let idx = build_spiral_index(&g, 1, &[5]).unwrap();
        let ring = &spiral_sequence(&g, 0, 1).unwrap()[1];
        assert_eq!(ring.len(), 3);
        let s = idx.sequence(0);
        assert_eq!(&s[1..4], ring.as_slice());
        assert_eq!(s[4], ring[2]);
        assert_eq!(s[5], ring[2]);
    }

    #[test]
    fn empty_ring_pads_with_previous_vertex() {
        let idx = build_spiral_index(&tetrahedron(), 2, &[3, 2]).unwrap();
        let s = idx.sequence(1);
        assert_eq!(s.len(), 6);
        assert_eq!(s[4], s[3]);
        assert_eq!(s[5], s[3]);
    }

    #[test]
    fn untruncated_spiral_covers_disk() {
        let m = icosphere(2);
        let topo = MeshTopology::new(&m);
        let idx = build_spiral_index(&m, 3, &[6, 12, 18]).unwrap();
        for v in 0..m.vertex_count() {
            let mut set = idx.sequence(v).to_vec();
            set.sort_unstable();
            set.dedup();
            assert_eq!(set, topo.k_disk(v, 3).unwrap());
        }
    }

    #[test]
    fn non_manifold_vertex_is_rejected() {
        // two triangles touching only at vertex 0 (bow tie)
        let v = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(-1.0, -1.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 3, 4]]).unwrap();
        assert!(matches!(
            build_spiral_index(&m, 1, &[4]),
            Err(Error::NonManifoldVertex(0))
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let idx = build_spiral_index(&icosahedron(), 2, &[5, 6]).unwrap();
        let back: SpiralIndex = serde_json::from_str(&idx.to_json()).unwrap();
        assert_eq!(idx, back);
        assert!(serde_json::from_str::<SpiralIndex>(
            r#"{"length": 2, "boundaries": [1, 2], "sequences": [[1, 0], [1, 0]]}"#
        )
        .is_err());
    }

    #[test]
    fn truncated_index_keeps_disk_prefixes() {
        let idx = build_spiral_index(&icosphere(1), 3, &[6, 12, 18]).unwrap();
        let t = idx.truncated(19).unwrap();
        assert_eq!(t.boundaries(), &[1, 7, 19]);
        assert_eq!(t.sequence(5), &idx.sequence(5)[..19]);
    }
}
