//! Benchmark orchestration, temporal replay and differential verification.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};
use crate::io::TemporalStream;
use crate::label::{DblIndex, IndexConfig};
use crate::query::{query_batch, AnsweredBy, BatchStats, Querier, QueryOptions};
use crate::update::{self, verify_labels, DeleteOptions, UpdateStats};

use super::generators::{self, DistanceClass};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub d_avg: f64,
}

impl GraphStats {
    pub fn of(g: &DynamicGraph) -> Self {
        GraphStats {
            n: g.vertex_count(),
            m: g.edge_count(),
            d_avg: g.average_degree(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdatePhase {
    pub inserts: u64,
    pub deletes: u64,
    pub insert_ms: f64,
    pub delete_ms: f64,
    pub visited: u64,
    pub labels_changed: u64,
    pub early_terminated: u64,
    pub tainted: u64,
}

impl UpdatePhase {
    fn add(&mut self, stats: UpdateStats) {
        self.visited += stats.visited;
        self.labels_changed += stats.labels_changed;
        self.early_terminated += stats.early_terminated as u64;
        self.tainted += stats.tainted as u64;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryPhase {
    pub queries: u64,
    pub query_ms: f64,
    /// Fraction answered by labels alone.
    pub rho: f64,
    pub reachable_fraction: f64,
    pub label_answered: u64,
    pub visited_total: u64,
    pub answered_by: BTreeMap<AnsweredBy, u64>,
}

impl QueryPhase {
    fn from_stats(s: &BatchStats) -> Self {
        QueryPhase {
            queries: s.queries,
            query_ms: s.total_ms,
            rho: s.rho,
            reachable_fraction: if s.queries == 0 {
                0.0
            } else {
                s.reachable as f64 / s.queries as f64
            },
            label_answered: s.label_answered,
            visited_total: s.visited_total,
            answered_by: s.answered_by.iter().copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub class: DistanceClass,
    pub requested: usize,
    pub shortfall: usize,
    pub query: QueryPhase,
}

/// Cumulative counters after `events` replayed edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayRow {
    pub events: u64,
    pub insert_ms: f64,
    pub delete_ms: f64,
    pub visited: u64,
    pub labels_changed: u64,
    pub tainted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub graph: GraphStats,
    pub config: IndexConfig,
    pub seed: u64,
    pub workers: usize,
    pub build_ms: f64,
    pub index_bits: u64,
    pub updates: UpdatePhase,
    pub query: Option<QueryPhase>,
    #[serde(default)]
    pub distances: Vec<DistanceRow>,
    #[serde(default)]
    pub replay: Vec<ReplayRow>,
}

impl BenchReport {
    fn new(g: &DynamicGraph, idx: &DblIndex, seed: u64, workers: usize, build_ms: f64) -> Self {
        BenchReport {
            schema_version: REPORT_SCHEMA_VERSION,
            graph: GraphStats::of(g),
            config: idx.config().clone(),
            seed,
            workers,
            build_ms,
            index_bits: idx.total_bits() as u64,
            updates: UpdatePhase::default(),
            query: None,
            distances: Vec::new(),
            replay: Vec::new(),
        }
    }

    /// The report with every wall-clock field zeroed.
    pub fn without_timings(&self) -> BenchReport {
        let mut r = self.clone();
        r.build_ms = 0.0;
        r.updates.insert_ms = 0.0;
        r.updates.delete_ms = 0.0;
        if let Some(q) = r.query.as_mut() {
            q.query_ms = 0.0;
        }
        for d in &mut r.distances {
            d.query.query_ms = 0.0;
        }
        for row in &mut r.replay {
            row.insert_ms = 0.0;
            row.delete_ms = 0.0;
        }
        r
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub config: IndexConfig,
    pub queries: usize,
    pub inserts: usize,
    /// Random edge deletions applied after the insertions.
    pub deletes: usize,
    pub delete: DeleteOptions,
    pub seed: u64,
    pub workers: usize,
    pub options: QueryOptions,
    /// Explicit query pairs; replaces the random batch when set.
    pub query_pairs: Option<Vec<(VertexId, VertexId)>>,
    pub distance_classes: Vec<DistanceClass>,
    pub distance_count: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            config: IndexConfig::default(),
            queries: 10_000,
            inserts: 0,
            deletes: 0,
            delete: DeleteOptions::default(),
            seed: 0,
            workers: 1,
            options: QueryOptions::default(),
            query_pairs: None,
            distance_classes: Vec::new(),
            distance_count: 1000,
        }
    }
}

/// Build, then [`run_bench_prebuilt`].
pub fn run_bench(g: DynamicGraph, spec: &BenchSpec) -> Result<BenchReport> {
    let t = Instant::now();
    let idx = DblIndex::build(&g, spec.config.clamped(g.vertex_count()))?;
    let build_ms = ms_since(t);
    run_bench_prebuilt(g, idx, build_ms, spec)
}

/// Insertions, deletions, the query batch and per-distance batches, in that
/// order. Seeds for each phase derive from `spec.seed`.
pub fn run_bench_prebuilt(
    mut g: DynamicGraph,
    mut idx: DblIndex,
    build_ms: f64,
    spec: &BenchSpec,
) -> Result<BenchReport> {
    idx.check_graph(&g)?;
    let mut report = BenchReport::new(&g, &idx, spec.seed, spec.workers, build_ms);

    if spec.inserts > 0 {
        let events = generators::gen_insert_workload(&g, spec.inserts, spec.seed ^ 0x1)?;
        let t = Instant::now();
        for e in &events {
            let s = update::insert_edge(&mut g, &mut idx, e.u, e.v)?;
            report.updates.add(s);
        }
        report.updates.insert_ms = ms_since(t);
        report.updates.inserts = events.len() as u64;
    }
    if spec.deletes > 0 {
        let events = generators::gen_delete_workload(&g, spec.deletes, spec.seed ^ 0x2)?;
        let t = Instant::now();
        for e in &events {
            let s = update::delete_edge_with(&mut g, &mut idx, e.u, e.v, spec.delete)?;
            report.updates.add(s);
        }
        report.updates.delete_ms = ms_since(t);
        report.updates.deletes = events.len() as u64;
    }
    if spec.inserts > 0 || spec.deletes > 0 {
        report.graph = GraphStats::of(&g);
        report.index_bits = idx.total_bits() as u64;
    }

    let pairs = match &spec.query_pairs {
        Some(p) => p.clone(),
        None => generators::gen_random_queries(g.vertex_count(), spec.queries, spec.seed ^ 0x3),
    };
    if !pairs.is_empty() {
        let r = query_batch(&g, &idx, &pairs, spec.workers, spec.options)?;
        report.query = Some(QueryPhase::from_stats(&r.stats));
    }
    for (i, &class) in spec.distance_classes.iter().enumerate() {
        let dq = generators::gen_distance_queries(&g, class, spec.distance_count, spec.seed ^ (0x10 + i as u64));
        let r = query_batch(&g, &idx, &dq.pairs, spec.workers, spec.options)?;
        report.distances.push(DistanceRow {
            class,
            requested: spec.distance_count,
            shortfall: dq.shortfall,
            query: QueryPhase::from_stats(&r.stats),
        });
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct ReplayOptions {
    pub config: IndexConfig,
    /// Fraction of the stream, by position, used for the initial build.
    pub warm_fraction: f64,
    /// Emit a cumulative row every this many replayed edges; 0 disables rows.
    pub report_every: usize,
    /// Slide a window of the warm size over the stream, deleting edges that
    /// leave it.
    pub allow_delete: bool,
    pub delete: DeleteOptions,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            config: IndexConfig::default(),
            warm_fraction: 0.5,
            report_every: 10_000,
            allow_delete: false,
            delete: DeleteOptions::default(),
        }
    }
}

pub struct Replay {
    pub report: BenchReport,
    pub graph: DynamicGraph,
    pub index: DblIndex,
}

/// Builds on the first `warm_fraction` of the time-sorted stream and inserts
/// the rest one edge at a time. All vertices of the stream exist from the
/// start.
pub fn replay_temporal(stream: &TemporalStream, options: &ReplayOptions) -> Result<Replay> {
    if !(0.0..=1.0).contains(&options.warm_fraction) {
        return Err(Error::Config(format!(
            "warm fraction {} is outside [0, 1]",
            options.warm_fraction
        )));
    }
    let edges = &stream.edges;
    let n = stream.ids.len();
    let warm = (edges.len() as f64 * options.warm_fraction).round() as usize;
    let warm = warm.min(edges.len());
    let window = warm.max(1);

    let mut live: HashMap<(VertexId, VertexId), u32> = HashMap::new();
    let mut g = DynamicGraph::with_vertices(n);
    for e in &edges[..warm] {
        g.add_edge(e.src, e.dst)?;
        *live.entry((e.src, e.dst)).or_default() += 1;
    }
    let t = Instant::now();
    let mut idx = DblIndex::build(&g, options.config.clamped(n))?;
    let build_ms = ms_since(t);
    let mut report = BenchReport::new(&g, &idx, 0, 1, build_ms);

    let mut phase = UpdatePhase::default();
    for (i, e) in edges.iter().enumerate().skip(warm) {
        let t = Instant::now();
        let s = update::insert_edge(&mut g, &mut idx, e.src, e.dst)?;
        phase.insert_ms += ms_since(t);
        phase.inserts += 1;
        phase.add(s);
        *live.entry((e.src, e.dst)).or_default() += 1;

        if options.allow_delete && i >= window {
            let old = &edges[i - window];
            let key = (old.src, old.dst);
            let count = live.get_mut(&key).expect("edge was inserted");
            *count -= 1;
            if *count == 0 {
                live.remove(&key);
                let t = Instant::now();
                let s = update::delete_edge_with(&mut g, &mut idx, old.src, old.dst, options.delete)?;
                phase.delete_ms += ms_since(t);
                phase.deletes += 1;
                phase.add(s);
            }
        }
        let done = (i + 1 - warm) as u64;
        if options.report_every > 0 && done % options.report_every as u64 == 0 {
            report.replay.push(ReplayRow {
                events: done,
                insert_ms: phase.insert_ms,
                delete_ms: phase.delete_ms,
                visited: phase.visited,
                labels_changed: phase.labels_changed,
                tainted: phase.tainted,
            });
        }
    }
    report.updates = phase;
    report.graph = GraphStats::of(&g);
    report.index_bits = idx.total_bits() as u64;
    Ok(Replay {
        report,
        graph: g,
        index: idx,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub pairs: u64,
    pub disagreements: u64,
    /// First disagreeing pair and the oracle's answer.
    pub first: Option<(VertexId, VertexId, bool)>,
}

/// Compares the index against plain BFS on all `n^2` pairs.
pub fn check_against_oracle(g: &DynamicGraph, idx: &DblIndex) -> Result<OracleCheck> {
    let mut q = Querier::new(g, idx)?;
    let mut check = OracleCheck::default();
    for u in g.vertices() {
        let reach = g.descendants(u);
        for v in g.vertices() {
            check.pairs += 1;
            let got = q.query(u, v)?.reachable;
            if got != reach[v.index()] {
                check.disagreements += 1;
                check.first.get_or_insert((u, v, reach[v.index()]));
            }
        }
    }
    Ok(check)
}

#[derive(Clone, Debug)]
pub struct VerifySpec {
    pub seed: u64,
    pub graphs: usize,
    pub max_n: usize,
    pub config: IndexConfig,
    /// Random insertions applied before the second check of each graph.
    pub inserts: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            seed: 0,
            graphs: 50,
            max_n: 200,
            config: IndexConfig {
                k: 8,
                k_prime: 8,
                ..IndexConfig::default()
            },
            inserts: 100,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub graphs: u64,
    pub pairs: u64,
    pub disagreements: u64,
    pub label_violations: u64,
    pub failures: Vec<String>,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.disagreements == 0 && self.label_violations == 0
    }

    /// Checks `idx` against the oracle and the label fixpoint, recording
    /// failures under `name`.
    pub fn check(&mut self, name: &str, g: &DynamicGraph, idx: &DblIndex) -> Result<()> {
        let oc = check_against_oracle(g, idx)?;
        self.pairs += oc.pairs;
        self.disagreements += oc.disagreements;
        if let Some((u, v, want)) = oc.first {
            self.failures.push(format!(
                "{name}: {} disagreements, first q({u}, {v}) should be {want}",
                oc.disagreements
            ));
        }
        let vr = verify_labels(g, idx, g.vertex_count() <= 5000)?;
        if !vr.ok {
            self.label_violations += vr.violations.len() as u64;
            self.failures.push(format!("{name}: {} label violations", vr.violations.len()));
        }
        Ok(())
    }
}

/// Random graphs alternating between general digraphs and DAGs, each checked
/// after build and again after a seeded insertion workload.
pub fn verify_random(spec: &VerifySpec) -> Result<VerifySummary> {
    let mut sum = VerifySummary::default();
    let mut r = generators::rng(spec.seed);
    let max_n = spec.max_n.max(2);
    for i in 0..spec.graphs {
        let n = r.random_range((max_n / 4).max(2)..=max_n);
        let d_avg = r.random_range(1.0..=20.0);
        let gseed = r.random::<u64>();
        let (mut g, family) = if i % 2 == 0 {
            (generators::random_digraph(n, d_avg, gseed), "digraph")
        } else {
            (generators::random_dag(n, d_avg, gseed), "dag")
        };
        let name = format!("graph {i} ({family}, n={n}, m={})", g.edge_count());
        let mut idx = DblIndex::build(&g, spec.config.clamped(n))?;
        sum.check(&name, &g, &idx)?;
        let available = n * (n - 1) - g.edge_count();
        let events = generators::gen_insert_workload(&g, spec.inserts.min(available), gseed ^ 0x5)?;
        for e in &events {
            update::insert_edge(&mut g, &mut idx, e.u, e.v)?;
        }
        sum.check(&format!("{name} after {} inserts", events.len()), &g, &idx)?;
        sum.graphs += 1;
    }
    Ok(sum)
}
