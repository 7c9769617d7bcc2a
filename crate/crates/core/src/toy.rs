//! The eleven-vertex running example graph.
//!
//! Vertices are named `v1..v11` in the docs; [`v`] maps those names onto the
//! dense ids `0..11`. With landmarks `{v5, v8}` and a two-bucket leaf hash
//! (`v1, v10 -> 0`, `v2, v3, v11 -> 1`) the index matches the worked tables
//! in the README.

use std::collections::HashMap;

use crate::graph::{DynamicGraph, VertexId};
use crate::label::{DblIndex, IndexConfig, LandmarkSet, LeafHasher, LeafSets};

/// Dense id of the example vertex `v{name}` (1-based name).
pub fn v(name: usize) -> VertexId {
    assert!((1..=11).contains(&name), "example vertices are v1..v11");
    VertexId::from(name - 1)
}

pub const EDGES: [(usize, usize); 12] = [
    (1, 4),
    (2, 5),
    (2, 6),
    (3, 7),
    (4, 8),
    (5, 6),
    (5, 8),
    (6, 9),
    (7, 11),
    (8, 10),
    (9, 5),
    (9, 11),
];

pub fn graph() -> DynamicGraph {
    DynamicGraph::from_edges(11, EDGES.iter().map(|&(a, b)| (v(a), v(b))))
        .expect("example edges are in range")
}

pub fn config() -> IndexConfig {
    IndexConfig {
        k: 2,
        k_prime: 2,
        ..IndexConfig::default()
    }
}

/// Leaf hash with the hand-picked buckets of the example.
pub fn leaf_hasher() -> LeafHasher {
    let overrides: HashMap<VertexId, usize> =
        [(1, 0), (10, 0), (2, 1), (3, 1), (11, 1)]
            .into_iter()
            .map(|(name, bucket)| (v(name), bucket))
            .collect();
    LeafHasher::new(2, 0).with_overrides(overrides)
}

pub fn landmarks() -> LandmarkSet {
    LandmarkSet::new(vec![v(5), v(8)]).expect("distinct landmarks")
}

/// Index over [`graph`] with landmarks `{v5, v8}` and the example leaf hash.
pub fn index(g: &DynamicGraph) -> DblIndex {
    let leaves = LeafSets::select(g, 0, &leaf_hasher());
    DblIndex::build_with(g, config(), landmarks(), leaves)
}
