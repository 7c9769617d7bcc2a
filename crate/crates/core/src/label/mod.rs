//! The DBL index: per-vertex landmark (DL) and leaf (BL) bit-vector labels.
//!
//! * `DL_in(v)`: landmarks that reach `v`; `DL_out(v)`: landmarks `v` reaches.
//! * `BL_in(v)`: buckets of source leaves that reach `v`; `BL_out(v)`:
//!   buckets of sink leaves `v` reaches.
//!
//! Reachability is reflexive, so a landmark carries its own bit in both DL
//! labels and a leaf carries its own bucket in the matching BL label.
//! A non-empty `DL_out(u) & DL_in(v)` proves `u -> v`; a failed BL
//! containment proves `u -/-> v`.

mod select;
pub mod snapshot;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bits::{self, BitLabel, LabelArray};
use crate::error::{Error, Result};
use crate::graph::{Direction, DynamicGraph, VertexId};

pub use select::{leaf_hash, LandmarkSet, LandmarkStrategy, LeafHasher, LeafSets, LEAF_HASH_MULTIPLIER};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexConfig {
    /// DL width: number of landmarks.
    pub k: usize,
    /// BL width: number of leaf buckets.
    pub k_prime: usize,
    pub landmark_strategy: LandmarkStrategy,
    /// Vertices with `|Pre| * |Suc| <= leaf_threshold` become leaves; 0 keeps
    /// only degree-zero endpoints.
    pub leaf_threshold: u64,
    pub hash_seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            k: 64,
            k_prime: 64,
            landmark_strategy: LandmarkStrategy::Product,
            leaf_threshold: 0,
            hash_seed: 0,
        }
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_prime == 0 {
            return Err(Error::Config("k_prime must be at least 1".into()));
        }
        Ok(())
    }

    /// Copy with `k` reduced to at most `n` landmarks.
    pub fn clamped(&self, n: usize) -> IndexConfig {
        if self.k > n {
            log::warn!("k={} exceeds {n} vertices, using k={n}", self.k);
        }
        IndexConfig {
            k: self.k.min(n),
            ..self.clone()
        }
    }

    pub fn leaf_hasher(&self) -> LeafHasher {
        LeafHasher::new(self.k_prime, self.hash_seed)
    }
}

/// Which of the four label families a bit belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelFamily {
    DlIn,
    DlOut,
    BlIn,
    BlOut,
}

impl LabelFamily {
    pub const ALL: [LabelFamily; 4] = [
        LabelFamily::DlIn,
        LabelFamily::DlOut,
        LabelFamily::BlIn,
        LabelFamily::BlOut,
    ];

    /// Direction along which this family propagates from its seeds.
    pub fn direction(self) -> Direction {
        match self {
            LabelFamily::DlIn | LabelFamily::BlIn => Direction::Forward,
            LabelFamily::DlOut | LabelFamily::BlOut => Direction::Backward,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DblIndex {
    config: IndexConfig,
    landmarks: LandmarkSet,
    leaves: LeafSets,
    dl_in: LabelArray,
    dl_out: LabelArray,
    bl_in: LabelArray,
    bl_out: LabelArray,
}

impl DblIndex {
    /// Selects landmarks and leaves from `g` and builds all four label families.
    pub fn build(g: &DynamicGraph, config: IndexConfig) -> Result<Self> {
        config.validate()?;
        let landmarks = LandmarkSet::select(g, config.k, config.landmark_strategy)?;
        let leaves = LeafSets::select(g, config.leaf_threshold, &config.leaf_hasher());
        Ok(Self::build_with(g, config, landmarks, leaves))
    }

    /// Builds labels for fixed landmark and leaf sets.
    ///
    /// `config.k` is overwritten with the landmark count.
    pub fn build_with(
        g: &DynamicGraph,
        mut config: IndexConfig,
        landmarks: LandmarkSet,
        leaves: LeafSets,
    ) -> Self {
        config.k = landmarks.len();
        let n = g.vertex_count();
        for &l in landmarks.as_slice() {
            if leaves.in_bucket(l).is_some() || leaves.out_bucket(l).is_some() {
                log::warn!("vertex {l} is both a landmark and a leaf");
            }
        }
        let mut idx = DblIndex {
            dl_in: LabelArray::new(config.k, n),
            dl_out: LabelArray::new(config.k, n),
            bl_in: LabelArray::new(config.k_prime, n),
            bl_out: LabelArray::new(config.k_prime, n),
            config,
            landmarks,
            leaves,
        };
        idx.fill_labels(g);
        idx
    }

    /// Fresh build on `g` reusing this index's configuration, landmarks and
    /// leaves.
    pub fn rebuild(&self, g: &DynamicGraph) -> Self {
        let mut leaves = self.leaves.clone();
        assert!(
            self.landmarks
                .as_slice()
                .iter()
                .all(|l| l.index() < g.vertex_count()),
            "graph lost landmark vertices"
        );
        while leaves.vertex_count() < g.vertex_count() {
            leaves.push_vertex();
        }
        Self::build_with(g, self.config.clone(), self.landmarks.clone(), leaves)
    }

    fn fill_labels(&mut self, g: &DynamicGraph) {
        let mut queue = VecDeque::new();
        for (i, &l) in self.landmarks.as_slice().iter().enumerate() {
            flood(g, Direction::Forward, &[l], i, &mut self.dl_in, &mut queue);
            flood(g, Direction::Backward, &[l], i, &mut self.dl_out, &mut queue);
        }
        let kp = self.config.k_prime;
        let mut by_bucket: Vec<Vec<VertexId>> = vec![Vec::new(); kp];
        for &s in self.leaves.leaves_in() {
            by_bucket[self.leaves.in_bucket(s).unwrap()].push(s);
        }
        for (b, seeds) in by_bucket.iter_mut().enumerate() {
            flood(g, Direction::Forward, seeds, b, &mut self.bl_in, &mut queue);
            seeds.clear();
        }
        for &t in self.leaves.leaves_out() {
            by_bucket[self.leaves.out_bucket(t).unwrap()].push(t);
        }
        for (b, seeds) in by_bucket.iter().enumerate() {
            flood(g, Direction::Backward, seeds, b, &mut self.bl_out, &mut queue);
        }
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn landmarks(&self) -> &LandmarkSet {
        &self.landmarks
    }

    pub fn leaves(&self) -> &LeafSets {
        &self.leaves
    }

    pub fn vertex_count(&self) -> usize {
        self.dl_in.len()
    }

    /// Errors unless the index covers exactly the vertices of `g`.
    pub fn check_graph(&self, g: &DynamicGraph) -> Result<()> {
        if self.vertex_count() == g.vertex_count() {
            Ok(())
        } else {
            Err(Error::IndexMismatch {
                index_vertices: self.vertex_count(),
                graph_vertices: g.vertex_count(),
            })
        }
    }

    #[inline]
    pub fn dl_in(&self, v: VertexId) -> &[u64] {
        self.dl_in.get(v.index())
    }

    #[inline]
    pub fn dl_out(&self, v: VertexId) -> &[u64] {
        self.dl_out.get(v.index())
    }

    #[inline]
    pub fn bl_in(&self, v: VertexId) -> &[u64] {
        self.bl_in.get(v.index())
    }

    #[inline]
    pub fn bl_out(&self, v: VertexId) -> &[u64] {
        self.bl_out.get(v.index())
    }

    #[inline]
    pub fn label(&self, family: LabelFamily, v: VertexId) -> &[u64] {
        self.array(family).get(v.index())
    }

    pub fn label_set(&self, family: LabelFamily, v: VertexId) -> BitLabel {
        self.array(family).to_label(v.index())
    }

    pub(crate) fn array(&self, family: LabelFamily) -> &LabelArray {
        match family {
            LabelFamily::DlIn => &self.dl_in,
            LabelFamily::DlOut => &self.dl_out,
            LabelFamily::BlIn => &self.bl_in,
            LabelFamily::BlOut => &self.bl_out,
        }
    }

    pub(crate) fn array_mut(&mut self, family: LabelFamily) -> &mut LabelArray {
        match family {
            LabelFamily::DlIn => &mut self.dl_in,
            LabelFamily::DlOut => &mut self.dl_out,
            LabelFamily::BlIn => &mut self.bl_in,
            LabelFamily::BlOut => &mut self.bl_out,
        }
    }

    /// The bit `v` always carries in `family` because it seeds it, if any.
    #[inline]
    pub fn own_bit(&self, family: LabelFamily, v: VertexId) -> Option<usize> {
        match family {
            LabelFamily::DlIn | LabelFamily::DlOut => self.landmarks.position(v),
            LabelFamily::BlIn => self.leaves.in_bucket(v),
            LabelFamily::BlOut => self.leaves.out_bucket(v),
        }
    }

    /// `DL_out(x) & DL_in(y) != 0`: a landmark certifies `x -> y`.
    #[inline]
    pub fn dl_intersec(&self, x: VertexId, y: VertexId) -> bool {
        bits::intersects(self.dl_out(x), self.dl_in(y))
    }

    /// `BL_in(x) ⊆ BL_in(y) && BL_out(y) ⊆ BL_out(x)`. `false` proves `x -/-> y`.
    #[inline]
    pub fn bl_contain(&self, x: VertexId, y: VertexId) -> bool {
        bits::is_subset(self.bl_in(x), self.bl_in(y)) && bits::is_subset(self.bl_out(y), self.bl_out(x))
    }

    /// Appends a vertex with empty labels that is neither landmark nor leaf.
    pub(crate) fn push_vertex(&mut self) {
        self.dl_in.push_empty();
        self.dl_out.push_empty();
        self.bl_in.push_empty();
        self.bl_out.push_empty();
        self.leaves.push_vertex();
    }

    /// Resets `v`'s labels to the base state: only its own landmark/leaf bits.
    pub(crate) fn reset_vertex(&mut self, v: VertexId) {
        for family in LabelFamily::ALL {
            let own = self.own_bit(family, v);
            let label = self.array_mut(family).get_mut(v.index());
            label.fill(0);
            if let Some(b) = own {
                bits::set(label, b);
            }
        }
    }

    /// Total number of set bits over all labels.
    pub fn total_bits(&self) -> usize {
        LabelFamily::ALL
            .iter()
            .map(|&f| {
                self.array(f)
                    .raw_words()
                    .iter()
                    .map(|w| w.count_ones() as usize)
                    .sum::<usize>()
            })
            .sum()
    }

    /// Whether every label equals the corresponding label of `other`.
    pub fn labels_equal(&self, other: &DblIndex) -> bool {
        LabelFamily::ALL
            .iter()
            .all(|&f| self.array(f) == other.array(f))
    }

    /// First label difference against `other`, for diagnostics.
    pub fn first_difference(&self, other: &DblIndex) -> Option<(LabelFamily, VertexId)> {
        let n = self.vertex_count().min(other.vertex_count());
        for f in LabelFamily::ALL {
            for v in 0..n {
                let v = VertexId::from(v);
                if self.label(f, v) != other.label(f, v) {
                    return Some((f, v));
                }
            }
        }
        None
    }

    /// Flips one bit; used for fault-injection tests of the verifier.
    pub fn toggle_bit(&mut self, family: LabelFamily, v: VertexId, bit: usize) {
        let label = self.array_mut(family).get_mut(v.index());
        if bits::contains(label, bit) {
            bits::clear(label, bit);
        } else {
            bits::set(label, bit);
        }
    }
}

/// BFS from `seeds` setting `bit` in `labels`; a vertex already carrying the
/// bit is not expanded again.
fn flood(
    g: &DynamicGraph,
    dir: Direction,
    seeds: &[VertexId],
    bit: usize,
    labels: &mut LabelArray,
    queue: &mut VecDeque<VertexId>,
) {
    queue.clear();
    for &s in seeds {
        if bits::set(labels.get_mut(s.index()), bit) {
            queue.push_back(s);
        }
    }
    while let Some(p) = queue.pop_front() {
        for &x in g.neighbors(p, dir) {
            if bits::set(labels.get_mut(x.index()), bit) {
                queue.push_back(x);
            }
        }
    }
}
