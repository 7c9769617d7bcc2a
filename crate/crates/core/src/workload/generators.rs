//! Seeded graph and workload generators.
//!
//! Every generator draws from a ChaCha8 stream seeded with the caller's seed,
//! so outputs are identical across runs and platforms.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

use super::{EventKind, WorkloadEvent};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn target_edges(n: usize, d_avg: f64, max: usize) -> usize {
    ((n as f64 * d_avg).round().max(0.0) as usize).min(max)
}

/// Draws `m` distinct edges with `draw`, which may return `None` to reject.
fn sample_distinct<R: Rng>(
    n: usize,
    m: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Option<(u32, u32)>,
) -> DynamicGraph {
    let mut g = DynamicGraph::with_vertices(n);
    let mut seen = HashSet::with_capacity(m);
    while seen.len() < m {
        if let Some(e) = draw(rng) {
            if seen.insert(e) {
                g.add_edge(VertexId(e.0), VertexId(e.1)).expect("ids in range");
            }
        }
    }
    g
}

/// Uniform random digraph with about `n * d_avg` distinct edges and no
/// self-loops. Usually cyclic once `d_avg` exceeds 1.
pub fn random_digraph(n: usize, d_avg: f64, seed: u64) -> DynamicGraph {
    let mut r = rng(seed);
    let m = target_edges(n, d_avg, n * n.saturating_sub(1));
    if 2 * m > n * n.saturating_sub(1) {
        let mut all: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (0..n as u32).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        all.shuffle(&mut r);
        return DynamicGraph::from_edges(
            n,
            all[..m].iter().map(|&(a, b)| (VertexId(a), VertexId(b))),
        )
        .expect("ids in range");
    }
    sample_distinct(n, m, &mut r, |r| {
        let a = r.random_range(0..n as u32);
        let b = r.random_range(0..n as u32);
        (a != b).then_some((a, b))
    })
}

/// Random DAG: edges are oriented along a hidden random topological order.
pub fn random_dag(n: usize, d_avg: f64, seed: u64) -> DynamicGraph {
    let mut r = rng(seed);
    let m = target_edges(n, d_avg, n * n.saturating_sub(1) / 2);
    let mut rank: Vec<u32> = (0..n as u32).collect();
    rank.shuffle(&mut r);
    if 2 * m > n * n.saturating_sub(1) / 2 {
        let mut all: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| ((a + 1)..n as u32).map(move |b| (a, b)))
            .collect();
        all.shuffle(&mut r);
        return DynamicGraph::from_edges(
            n,
            all[..m]
                .iter()
                .map(|&(a, b)| orient(&rank, a, b))
                .map(|(a, b)| (VertexId(a), VertexId(b))),
        )
        .expect("ids in range");
    }
    sample_distinct(n, m, &mut r, |r| {
        let a = r.random_range(0..n as u32);
        let b = r.random_range(0..n as u32);
        (a != b).then(|| orient(&rank, a, b))
    })
}

fn orient(rank: &[u32], a: u32, b: u32) -> (u32, u32) {
    if rank[a as usize] < rank[b as usize] {
        (a, b)
    } else {
        (b, a)
    }
}

/// Skewed digraph: endpoints are drawn with Zipf-like weights
/// `(i + 1)^-exponent` under independent random permutations for the source
/// and target side. The heavy vertices form one giant strongly connected
/// component; light vertices are frequently sources or sinks.
pub fn power_law_digraph(n: usize, d_avg: f64, seed: u64) -> DynamicGraph {
    const EXPONENT: f64 = 1.0;
    let mut r = rng(seed);
    let m = target_edges(n, d_avg, n * n.saturating_sub(1) / 4);
    let weights: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-EXPONENT)).collect();
    let mut out_perm: Vec<u32> = (0..n as u32).collect();
    let mut in_perm = out_perm.clone();
    out_perm.shuffle(&mut r);
    in_perm.shuffle(&mut r);
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    sample_distinct(n, m, &mut r, |r| {
        let a = out_perm[dist.sample(r)];
        let b = in_perm[dist.sample(r)];
        (a != b).then_some((a, b))
    })
}

/// Uniform independent pairs over `0..n` (self-pairs included).
pub fn gen_random_queries(n: usize, count: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    if n == 0 {
        return Vec::new();
    }
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let u = r.random_range(0..n as u32);
            let v = r.random_range(0..n as u32);
            (VertexId(u), VertexId(v))
        })
        .collect()
}

/// Requested shortest-path distance for a query pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DistanceClass {
    Hops(usize),
    Unreachable,
}

impl DistanceClass {
    pub const STANDARD: [DistanceClass; 5] = [
        DistanceClass::Hops(2),
        DistanceClass::Hops(4),
        DistanceClass::Hops(6),
        DistanceClass::Hops(8),
        DistanceClass::Unreachable,
    ];
}

impl fmt::Display for DistanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceClass::Hops(h) => write!(f, "{h}"),
            DistanceClass::Unreachable => f.write_str("unreachable"),
        }
    }
}

impl FromStr for DistanceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unreachable") || s.eq_ignore_ascii_case("inf") {
            return Ok(DistanceClass::Unreachable);
        }
        match s.parse::<usize>() {
            Ok(h) if h > 0 => Ok(DistanceClass::Hops(h)),
            _ => Err(Error::Config(format!("invalid distance class {s:?}"))),
        }
    }
}

impl From<DistanceClass> for String {
    fn from(d: DistanceClass) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DistanceClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceQueries {
    pub class: DistanceClass,
    pub pairs: Vec<(VertexId, VertexId)>,
    /// Requested pairs that could not be found.
    pub shortfall: usize,
}

/// Random sources tried per requested pair before giving up on it.
pub const DISTANCE_ATTEMPTS: usize = 64;

/// Rejection-samples pairs at an exact shortest-path distance (or mutually
/// unreachable pairs). BFS from each sampled source is truncated at the
/// requested depth.
pub fn gen_distance_queries(
    g: &DynamicGraph,
    class: DistanceClass,
    count: usize,
    seed: u64,
) -> DistanceQueries {
    let mut r = rng(seed);
    let n = g.vertex_count();
    let mut pairs = Vec::with_capacity(count);
    let mut shortfall = 0;
    let mut candidates = Vec::new();
    for _ in 0..count {
        let mut found = None;
        for _ in 0..DISTANCE_ATTEMPTS {
            if n == 0 {
                break;
            }
            let u = VertexId(r.random_range(0..n as u32));
            let dist = match class {
                DistanceClass::Hops(h) => g.hop_distances(u, Some(h)),
                DistanceClass::Unreachable => g.hop_distances(u, None),
            };
            candidates.clear();
            candidates.extend(
                dist.iter()
                    .enumerate()
                    .filter(|(_, d)| match class {
                        DistanceClass::Hops(h) => **d == Some(h),
                        DistanceClass::Unreachable => d.is_none(),
                    })
                    .map(|(i, _)| VertexId(i as u32)),
            );
            if let Some(&v) = candidates.get(r.random_range(0..candidates.len().max(1))) {
                found = Some((u, v));
                break;
            }
        }
        match found {
            Some(p) => pairs.push(p),
            None => shortfall += 1,
        }
    }
    DistanceQueries {
        class,
        pairs,
        shortfall,
    }
}

/// `count` distinct insertions of edges absent from `g` (self-loops
/// excluded).
pub fn gen_insert_workload(g: &DynamicGraph, count: usize, seed: u64) -> Result<Vec<WorkloadEvent>> {
    let n = g.vertex_count();
    let existing = g.edges().filter(|(a, b)| a != b).count();
    let available = n * n.saturating_sub(1) - existing;
    if count > available {
        return Err(Error::Exhausted(format!(
            "requested {count} new edges but only {available} are absent"
        )));
    }
    let mut r = rng(seed);
    let pairs: Vec<(u32, u32)> = if 2 * count > available {
        let mut all: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|a| (0..n as u32).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && !g.has_edge(VertexId(a), VertexId(b)))
            .collect();
        all.shuffle(&mut r);
        all.truncate(count);
        all
    } else {
        let mut seen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let a = r.random_range(0..n as u32);
            let b = r.random_range(0..n as u32);
            if a != b && !g.has_edge(VertexId(a), VertexId(b)) && seen.insert((a, b)) {
                out.push((a, b));
            }
        }
        out
    };
    Ok(pairs
        .into_iter()
        .map(|(a, b)| WorkloadEvent::new(EventKind::Insert, VertexId(a), VertexId(b)))
        .collect())
}

/// `count` distinct existing edges to delete, in random order.
pub fn gen_delete_workload(g: &DynamicGraph, count: usize, seed: u64) -> Result<Vec<WorkloadEvent>> {
    let mut edges: Vec<_> = g.edges().collect();
    if count > edges.len() {
        return Err(Error::Exhausted(format!(
            "requested {count} deletions but the graph has {} edges",
            edges.len()
        )));
    }
    edges.shuffle(&mut rng(seed));
    Ok(edges[..count]
        .iter()
        .map(|&(a, b)| WorkloadEvent::new(EventKind::Delete, a, b))
        .collect())
}
