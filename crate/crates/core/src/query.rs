//! Reachability queries: label checks first, then a label-pruned forward BFS.
//!
//! Order of checks for `q(u, v)`:
//!
//! 0. `u == v` answers true.
//! 1. `DL_out(u) & DL_in(v) != 0` answers true.
//! 2. failed BL containment answers false.
//! 3. `DL_out(v) & DL_in(u) != 0` answers false: `v` reaches `u` through a
//!    landmark, so if `u` also reached `v` both would share that landmark's
//!    cone and step 1 would have fired.
//! 4. `DL_intersec(u, u)` or `DL_intersec(v, v)` answers false: one endpoint
//!    shares a strongly connected component with a landmark, whose labels
//!    cover its reachability completely.
//! 5. forward BFS from `u`. A discovered vertex `x` is not expanded when
//!    `DL_intersec(u, x)` holds (any target behind `x` would have been caught
//!    by step 1) or when BL containment rules out `x -> v`.

use std::collections::VecDeque;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{DynamicGraph, VertexId};
use crate::label::DblIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnsweredBy {
    Reflexive,
    DlPositive,
    BlNegative,
    Thm1Negative,
    Thm2Negative,
    BfsPositive,
    BfsNegative,
}

impl AnsweredBy {
    pub const ALL: [AnsweredBy; 7] = [
        AnsweredBy::Reflexive,
        AnsweredBy::DlPositive,
        AnsweredBy::BlNegative,
        AnsweredBy::Thm1Negative,
        AnsweredBy::Thm2Negative,
        AnsweredBy::BfsPositive,
        AnsweredBy::BfsNegative,
    ];

    pub fn is_bfs(self) -> bool {
        matches!(self, AnsweredBy::BfsPositive | AnsweredBy::BfsNegative)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AnsweredBy::Reflexive => "REFLEXIVE",
            AnsweredBy::DlPositive => "DL_POSITIVE",
            AnsweredBy::BlNegative => "BL_NEGATIVE",
            AnsweredBy::Thm1Negative => "THM1_NEGATIVE",
            AnsweredBy::Thm2Negative => "THM2_NEGATIVE",
            AnsweredBy::BfsPositive => "BFS_POSITIVE",
            AnsweredBy::BfsNegative => "BFS_NEGATIVE",
        }
    }
}

impl fmt::Display for AnsweredBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub reachable: bool,
    pub answered_by: AnsweredBy,
    /// Vertices dequeued by the BFS; zero for label answers.
    pub visited: u64,
}

impl QueryOutcome {
    fn label(reachable: bool, answered_by: AnsweredBy) -> Self {
        QueryOutcome {
            reachable,
            answered_by,
            visited: 0,
        }
    }
}

/// One-line provenance string.
pub fn explain(outcome: &QueryOutcome) -> String {
    match outcome.answered_by {
        AnsweredBy::Reflexive => "self-query: a vertex always reaches itself".to_owned(),
        AnsweredBy::DlPositive => "answered positive by DL label intersection".to_owned(),
        AnsweredBy::BlNegative => "answered negative by BL label containment".to_owned(),
        AnsweredBy::Thm1Negative => {
            "answered negative by reverse DL intersection (target reaches source via a landmark)"
                .to_owned()
        }
        AnsweredBy::Thm2Negative => {
            "answered negative by DL labels of a landmark-covered endpoint".to_owned()
        }
        AnsweredBy::BfsPositive => format!(
            "answered positive by pruned BFS, visited {} vertices",
            outcome.visited
        ),
        AnsweredBy::BfsNegative => format!(
            "answered negative by pruned BFS, visited {} vertices",
            outcome.visited
        ),
    }
}

/// Switches for the individual rules. The default enables everything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOptions {
    /// Use DL labels at all (steps 1, 3, 4 and DL pruning).
    pub use_dl: bool,
    /// Use BL labels at all (step 2 and BL pruning).
    pub use_bl: bool,
    pub reverse_dl_rule: bool,
    pub covered_endpoint_rule: bool,
    pub dl_prune: bool,
    pub bl_prune: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            use_dl: true,
            use_bl: true,
            reverse_dl_rule: true,
            covered_endpoint_rule: true,
            dl_prune: true,
            bl_prune: true,
        }
    }
}

impl QueryOptions {
    pub fn dl_only() -> Self {
        QueryOptions {
            use_bl: false,
            ..Self::default()
        }
    }

    pub fn bl_only() -> Self {
        QueryOptions {
            use_dl: false,
            ..Self::default()
        }
    }

    pub fn no_early_termination() -> Self {
        QueryOptions {
            reverse_dl_rule: false,
            covered_endpoint_rule: false,
            ..Self::default()
        }
    }

    pub fn no_pruning() -> Self {
        QueryOptions {
            dl_prune: false,
            bl_prune: false,
            ..Self::default()
        }
    }
}

/// Query executor holding reusable BFS scratch space.
///
/// The visited set is an epoch-stamped array: bumping the epoch clears it.
pub struct Querier<'a> {
    graph: &'a DynamicGraph,
    index: &'a DblIndex,
    options: QueryOptions,
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<VertexId>,
}

impl<'a> Querier<'a> {
    pub fn new(graph: &'a DynamicGraph, index: &'a DblIndex) -> Result<Self> {
        Self::with_options(graph, index, QueryOptions::default())
    }

    pub fn with_options(
        graph: &'a DynamicGraph,
        index: &'a DblIndex,
        options: QueryOptions,
    ) -> Result<Self> {
        index.check_graph(graph)?;
        Ok(Querier {
            graph,
            index,
            options,
            stamp: vec![0; graph.vertex_count()],
            epoch: 0,
            queue: VecDeque::new(),
        })
    }

    pub fn query(&mut self, u: VertexId, v: VertexId) -> Result<QueryOutcome> {
        self.graph.check_vertex(u)?;
        self.graph.check_vertex(v)?;
        Ok(self.query_unchecked(u, v))
    }

    pub(crate) fn query_unchecked(&mut self, u: VertexId, v: VertexId) -> QueryOutcome {
        let idx = self.index;
        let opt = self.options;
        if u == v {
            return QueryOutcome::label(true, AnsweredBy::Reflexive);
        }
        if opt.use_dl && idx.dl_intersec(u, v) {
            return QueryOutcome::label(true, AnsweredBy::DlPositive);
        }
        if opt.use_bl && !idx.bl_contain(u, v) {
            return QueryOutcome::label(false, AnsweredBy::BlNegative);
        }
        if opt.use_dl && opt.reverse_dl_rule && idx.dl_intersec(v, u) {
            return QueryOutcome::label(false, AnsweredBy::Thm1Negative);
        }
        if opt.use_dl
            && opt.covered_endpoint_rule
            && (idx.dl_intersec(u, u) || idx.dl_intersec(v, v))
        {
            return QueryOutcome::label(false, AnsweredBy::Thm2Negative);
        }
        let (reachable, visited) = self.pruned_bfs(u, v);
        QueryOutcome {
            reachable,
            answered_by: if reachable {
                AnsweredBy::BfsPositive
            } else {
                AnsweredBy::BfsNegative
            },
            visited,
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn pruned_bfs(&mut self, u: VertexId, v: VertexId) -> (bool, u64) {
        let epoch = self.next_epoch();
        let (g, idx, opt) = (self.graph, self.index, self.options);
        let dl_prune = opt.use_dl && opt.dl_prune;
        let bl_prune = opt.use_bl && opt.bl_prune;
        self.queue.clear();
        self.queue.push_back(u);
        self.stamp[u.index()] = epoch;
        let mut visited = 0u64;
        while let Some(w) = self.queue.pop_front() {
            visited += 1;
            for &x in g.successors(w) {
                if x == v {
                    return (true, visited);
                }
                if self.stamp[x.index()] == epoch {
                    continue;
                }
                self.stamp[x.index()] = epoch;
                if dl_prune && idx.dl_intersec(u, x) {
                    continue;
                }
                if bl_prune && !idx.bl_contain(x, v) {
                    continue;
                }
                self.queue.push_back(x);
            }
        }
        (false, visited)
    }
}

/// Single query with default options.
pub fn query(
    g: &DynamicGraph,
    idx: &DblIndex,
    u: VertexId,
    v: VertexId,
) -> Result<QueryOutcome> {
    Querier::new(g, idx)?.query(u, v)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub queries: u64,
    /// Fraction of queries answered without BFS.
    pub rho: f64,
    pub label_answered: u64,
    pub reachable: u64,
    pub visited_total: u64,
    /// Outcome counts per rule, in [`AnsweredBy::ALL`] order.
    pub answered_by: Vec<(AnsweredBy, u64)>,
    pub total_ms: f64,
}

impl BatchStats {
    pub fn from_outcomes(outcomes: &[QueryOutcome], total_ms: f64) -> Self {
        let mut counts = [0u64; 7];
        let mut visited_total = 0;
        let mut reachable = 0;
        for o in outcomes {
            let slot = AnsweredBy::ALL.iter().position(|&a| a == o.answered_by).unwrap();
            counts[slot] += 1;
            visited_total += o.visited;
            reachable += o.reachable as u64;
        }
        let label_answered = outcomes.iter().filter(|o| !o.answered_by.is_bfs()).count() as u64;
        let queries = outcomes.len() as u64;
        BatchStats {
            queries,
            rho: if queries == 0 {
                1.0
            } else {
                label_answered as f64 / queries as f64
            },
            label_answered,
            reachable,
            visited_total,
            answered_by: AnsweredBy::ALL.iter().copied().zip(counts).collect(),
            total_ms,
        }
    }

    pub fn count(&self, rule: AnsweredBy) -> u64 {
        self.answered_by
            .iter()
            .find(|(a, _)| *a == rule)
            .map_or(0, |(_, c)| *c)
    }
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub outcomes: Vec<QueryOutcome>,
    pub stats: BatchStats,
}

/// Runs `queries` over `workers` threads. Each worker takes a contiguous
/// chunk and owns its scratch buffers, so the outcome vector does not depend
/// on the worker count.
pub fn query_batch(
    g: &DynamicGraph,
    idx: &DblIndex,
    queries: &[(VertexId, VertexId)],
    workers: usize,
    options: QueryOptions,
) -> Result<BatchResult> {
    idx.check_graph(g)?;
    for &(u, v) in queries {
        g.check_vertex(u)?;
        g.check_vertex(v)?;
    }
    let workers = workers.max(1);
    let start = Instant::now();
    let mut outcomes = vec![
        QueryOutcome::label(true, AnsweredBy::Reflexive);
        queries.len()
    ];
    if workers == 1 || queries.len() < 2 * workers {
        let mut q = Querier::with_options(g, idx, options)?;
        for (slot, &(u, v)) in outcomes.iter_mut().zip(queries) {
            *slot = q.query_unchecked(u, v);
        }
    } else {
        let chunk = queries.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (qs, out) in queries.chunks(chunk).zip(outcomes.chunks_mut(chunk)) {
                scope.spawn(move || {
                    let mut q = Querier::with_options(g, idx, options)
                        .expect("index checked against graph");
                    for (slot, &(u, v)) in out.iter_mut().zip(qs) {
                        *slot = q.query_unchecked(u, v);
                    }
                });
            }
        });
    }
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let stats = BatchStats::from_outcomes(&outcomes, total_ms);
    Ok(BatchResult { outcomes, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::IndexConfig;
    use crate::toy::{self, v};
    use crate::workload::generators;

    #[test]
    fn toy_queries() {
        let g = toy::graph();
        let idx = toy::index(&g);
        let o = query(&g, &idx, v(1), v(10)).unwrap();
        assert_eq!(
            o,
            QueryOutcome {
                reachable: true,
                answered_by: AnsweredBy::DlPositive,
                visited: 0
            }
        );
        let o = query(&g, &idx, v(4), v(6)).unwrap();
        assert!(!o.reachable);
        assert_eq!(o.answered_by, AnsweredBy::BlNegative);
        let o = query(&g, &idx, v(3), v(11)).unwrap();
        assert!(o.reachable);
        assert_eq!(o.answered_by, AnsweredBy::BfsPositive);
        assert_eq!(o.visited, 2);
        let o = query(&g, &idx, v(7), v(7)).unwrap();
        assert_eq!(o.answered_by, AnsweredBy::Reflexive);
        assert!(o.reachable);
    }

    #[test]
    fn toy_batch_rho() {
        let g = toy::graph();
        let idx = toy::index(&g);
        let qs = [(v(1), v(10)), (v(4), v(6)), (v(3), v(11))];
        let r = query_batch(&g, &idx, &qs, 2, QueryOptions::default()).unwrap();
        // two label answers out of three
        assert_eq!(r.stats.label_answered, 2);
        assert!((r.stats.rho - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mismatch_is_an_error() {
        let mut g = toy::graph();
        let idx = toy::index(&g);
        g.add_vertex();
        assert!(query(&g, &idx, v(1), v(2)).is_err());
    }

    #[test]
    fn explain_strings() {
        let o = QueryOutcome::label(true, AnsweredBy::DlPositive);
        assert_eq!(explain(&o), "answered positive by DL label intersection");
        let o = QueryOutcome {
            reachable: false,
            answered_by: AnsweredBy::BfsNegative,
            visited: 42,
        };
        assert!(explain(&o).contains("42"));
        let o = QueryOutcome::label(true, AnsweredBy::Reflexive);
        assert!(explain(&o).contains("self-query"));
    }

    #[test]
    fn all_pairs_match_oracle() {
        for seed in 0..6 {
            let g = generators::random_digraph(80, 1.0 + seed as f64, seed);
            let idx = DblIndex::build(&g, IndexConfig { k: 8, k_prime: 8, ..Default::default() }).unwrap();
            let mut q = Querier::new(&g, &idx).unwrap();
            for u in g.vertices() {
                let reach = g.descendants(u);
                for w in g.vertices() {
                    assert_eq!(q.query(u, w).unwrap().reachable, reach[w.index()], "seed {seed} ({u},{w})");
                }
            }
        }
    }

    #[test]
    fn all_label_answerable_batch() {
        let g = toy::graph();
        let idx = toy::index(&g);
        let qs = [(v(1), v(10)), (v(4), v(6)), (v(5), v(5))];
        let r = query_batch(&g, &idx, &qs, 1, QueryOptions::default()).unwrap();
        assert_eq!(r.stats.rho, 1.0);
        assert_eq!(r.stats.visited_total, 0);
    }
}
