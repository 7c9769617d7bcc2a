//! Landmark ranking, leaf selection and the leaf bucket hash.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

/// Degree-based centrality score used to rank landmark candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandmarkStrategy {
    /// `max(|Pre(v)|, |Suc(v)|)`
    Max,
    /// `min(|Pre(v)|, |Suc(v)|)`
    Min,
    /// `|Pre(v)| + |Suc(v)|`
    Sum,
    /// `|Pre(v)| * |Suc(v)|`
    #[default]
    Product,
}

impl LandmarkStrategy {
    pub fn score(self, g: &DynamicGraph, v: VertexId) -> u64 {
        let (i, o) = (g.in_degree(v) as u64, g.out_degree(v) as u64);
        match self {
            LandmarkStrategy::Max => i.max(o),
            LandmarkStrategy::Min => i.min(o),
            LandmarkStrategy::Sum => i + o,
            LandmarkStrategy::Product => i * o,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            LandmarkStrategy::Max => 0,
            LandmarkStrategy::Min => 1,
            LandmarkStrategy::Sum => 2,
            LandmarkStrategy::Product => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => LandmarkStrategy::Max,
            1 => LandmarkStrategy::Min,
            2 => LandmarkStrategy::Sum,
            3 => LandmarkStrategy::Product,
            _ => return None,
        })
    }
}

impl std::str::FromStr for LandmarkStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "max" => Ok(LandmarkStrategy::Max),
            "b" | "min" => Ok(LandmarkStrategy::Min),
            "c" | "sum" => Ok(LandmarkStrategy::Sum),
            "ours" | "product" | "prod" => Ok(LandmarkStrategy::Product),
            other => Err(format!(
                "unknown landmark strategy {other:?} (expected max|min|sum|product)"
            )),
        }
    }
}

/// Ordered landmark list; landmark `i` owns bit `i` of every DL label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LandmarkSet {
    landmarks: Vec<VertexId>,
    position: HashMap<VertexId, usize>,
}

impl LandmarkSet {
    pub fn new(landmarks: Vec<VertexId>) -> Result<Self> {
        let mut position = HashMap::with_capacity(landmarks.len());
        for (i, &l) in landmarks.iter().enumerate() {
            if position.insert(l, i).is_some() {
                return Err(Error::Config(format!("landmark {l} listed twice")));
            }
        }
        Ok(LandmarkSet {
            landmarks,
            position,
        })
    }

    /// Top-`k` vertices by `strategy` score, ties broken by smaller id.
    pub fn select(g: &DynamicGraph, k: usize, strategy: LandmarkStrategy) -> Result<Self> {
        let n = g.vertex_count();
        if k > n {
            return Err(Error::Config(format!(
                "cannot select {k} landmarks from {n} vertices"
            )));
        }
        let mut ranked: Vec<(u64, VertexId)> =
            g.vertices().map(|v| (strategy.score(g, v), v)).collect();
        ranked.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Self::new(ranked.into_iter().take(k).map(|(_, v)| v).collect())
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.landmarks
    }

    /// Bit index owned by `v`, if it is a landmark.
    #[inline]
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.position.get(&v).copied()
    }
}

/// 64-bit multiplicative hash used for leaf buckets:
/// `bucket = (((id XOR seed) * 0x9E3779B97F4A7C15 mod 2^64) >> 32) mod k'`.
pub const LEAF_HASH_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn leaf_hash(v: VertexId, k_prime: usize, seed: u64) -> usize {
    assert!(k_prime >= 1, "leaf hash needs at least one bucket");
    let h = (u64::from(v.0) ^ seed).wrapping_mul(LEAF_HASH_MULTIPLIER) >> 32;
    (h % k_prime as u64) as usize
}

/// Leaf bucket assignment: [`leaf_hash`] plus an optional override table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafHasher {
    k_prime: usize,
    seed: u64,
    overrides: HashMap<VertexId, usize>,
}

impl LeafHasher {
    pub fn new(k_prime: usize, seed: u64) -> Self {
        LeafHasher {
            k_prime,
            seed,
            overrides: HashMap::new(),
        }
    }

    pub fn with_overrides(mut self, overrides: HashMap<VertexId, usize>) -> Self {
        assert!(overrides.values().all(|&b| b < self.k_prime));
        self.overrides = overrides;
        self
    }

    pub fn bucket(&self, v: VertexId) -> usize {
        self.overrides
            .get(&v)
            .copied()
            .unwrap_or_else(|| leaf_hash(v, self.k_prime, self.seed))
    }
}

/// Source leaves (seed `BL_in`) and sink leaves (seed `BL_out`) with their
/// buckets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafSets {
    leaves_in: Vec<VertexId>,
    leaves_out: Vec<VertexId>,
    in_bucket: Vec<Option<u32>>,
    out_bucket: Vec<Option<u32>>,
}

impl LeafSets {
    /// With `threshold == 0`, zero in-degree vertices become source leaves and
    /// zero out-degree vertices sink leaves. A positive threshold also adds
    /// every vertex with `|Pre(v)| * |Suc(v)| <= threshold` to both sets.
    pub fn select(g: &DynamicGraph, threshold: u64, hasher: &LeafHasher) -> Self {
        let mut leaves_in = Vec::new();
        let mut leaves_out = Vec::new();
        for v in g.vertices() {
            let (i, o) = (g.in_degree(v) as u64, g.out_degree(v) as u64);
            let generalized = threshold > 0 && i * o <= threshold;
            if i == 0 || generalized {
                leaves_in.push(v);
            }
            if o == 0 || generalized {
                leaves_out.push(v);
            }
        }
        let buckets = |list: &[VertexId]| {
            list.iter()
                .map(|&v| (v, hasher.bucket(v) as u32))
                .collect::<Vec<_>>()
        };
        let ins = buckets(&leaves_in);
        let outs = buckets(&leaves_out);
        Self::from_parts(g.vertex_count(), &ins, &outs)
    }

    pub(crate) fn from_parts(
        n: usize,
        ins: &[(VertexId, u32)],
        outs: &[(VertexId, u32)],
    ) -> Self {
        let mut in_bucket = vec![None; n];
        let mut out_bucket = vec![None; n];
        for &(v, b) in ins {
            in_bucket[v.index()] = Some(b);
        }
        for &(v, b) in outs {
            out_bucket[v.index()] = Some(b);
        }
        LeafSets {
            leaves_in: ins.iter().map(|p| p.0).collect(),
            leaves_out: outs.iter().map(|p| p.0).collect(),
            in_bucket,
            out_bucket,
        }
    }

    pub fn leaves_in(&self) -> &[VertexId] {
        &self.leaves_in
    }

    pub fn leaves_out(&self) -> &[VertexId] {
        &self.leaves_out
    }

    /// Bucket of `v` if it is a source leaf.
    #[inline]
    pub fn in_bucket(&self, v: VertexId) -> Option<usize> {
        self.in_bucket.get(v.index()).copied().flatten().map(|b| b as usize)
    }

    /// Bucket of `v` if it is a sink leaf.
    #[inline]
    pub fn out_bucket(&self, v: VertexId) -> Option<usize> {
        self.out_bucket.get(v.index()).copied().flatten().map(|b| b as usize)
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.in_bucket.len()
    }

    pub(crate) fn push_vertex(&mut self) {
        self.in_bucket.push(None);
        self.out_bucket.push(None);
    }
}
