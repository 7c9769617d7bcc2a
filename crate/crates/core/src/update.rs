//! Incremental label maintenance.
//!
//! Insertion of `(u, v)` unions `DL_in(u)`/`BL_in(u)` into every in-label of
//! `Des(v)` and `DL_out(v)`/`BL_out(v)` into every out-label of `Anc(u)`. Both
//! walks are BFS traversals that stop at vertices already holding the bits:
//! their whole cone holds them too.
//!
//! Deletion relies on the fixpoint property of exact labels: a vertex's
//! in-label is the union of its predecessors' in-labels plus its own seed bit
//! (out-labels symmetrically over successors). Bits that only the removed edge
//! sustained are found by set difference against the remaining neighbours and
//! retracted breadth first. This is exact on acyclic graphs. Inside a cycle two
//! vertices can keep each other's stale bits alive; such deletions are
//! reported as tainted.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bits::{self, BitLabel};
use crate::error::{Error, Result};
use crate::graph::{Direction, DynamicGraph, VertexId};
use crate::label::{DblIndex, LabelFamily};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Vertices dequeued during maintenance.
    pub visited: u64,
    /// Vertex label updates (a vertex counts once per direction).
    pub labels_changed: u64,
    /// Insertion skipped because DL labels already certified `u -> v`.
    pub early_terminated: bool,
    /// Deletion touched a cycle; labels may retain stale bits.
    pub tainted: bool,
    /// The index was rebuilt from scratch after a tainted deletion.
    pub rebuilt: bool,
}

impl UpdateStats {
    pub fn merge(&mut self, other: UpdateStats) {
        self.visited += other.visited;
        self.labels_changed += other.labels_changed;
        self.early_terminated &= other.early_terminated;
        self.tainted |= other.tainted;
        self.rebuilt |= other.rebuilt;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeleteOptions {
    /// Replace the index with a fresh build when a deletion is tainted.
    pub rebuild_on_taint: bool,
}

fn families(dir: Direction) -> (LabelFamily, LabelFamily) {
    match dir {
        Direction::Forward => (LabelFamily::DlIn, LabelFamily::BlIn),
        Direction::Backward => (LabelFamily::DlOut, LabelFamily::BlOut),
    }
}

/// Adds `(u, v)` to the graph and updates the labels.
pub fn insert_edge(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    u: VertexId,
    v: VertexId,
) -> Result<UpdateStats> {
    idx.check_graph(g)?;
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    let certified = idx.dl_intersec(u, v);
    g.add_edge(u, v)?;
    let mut stats = UpdateStats::default();
    if certified {
        stats.early_terminated = true;
        return Ok(stats);
    }
    let mut queue = VecDeque::new();
    // in-labels flow forward from v, out-labels backward from u
    union_propagate(g, idx, u, v, Direction::Forward, &mut queue, &mut stats);
    union_propagate(g, idx, v, u, Direction::Backward, &mut queue, &mut stats);
    Ok(stats)
}

fn union_propagate(
    g: &DynamicGraph,
    idx: &mut DblIndex,
    source: VertexId,
    start: VertexId,
    dir: Direction,
    queue: &mut VecDeque<VertexId>,
    stats: &mut UpdateStats,
) {
    let (dl_f, bl_f) = families(dir);
    let dl_src = idx.label_set(dl_f, source);
    let bl_src = idx.label_set(bl_f, source);
    let absorb = |idx: &mut DblIndex, x: VertexId| -> bool {
        let dl = idx.array_mut(dl_f).get_mut(x.index());
        let dl_changed = bits::union_into(dl, dl_src.words());
        let bl = idx.array_mut(bl_f).get_mut(x.index());
        let bl_changed = bits::union_into(bl, bl_src.words());
        dl_changed || bl_changed
    };
    queue.clear();
    if absorb(idx, start) {
        stats.labels_changed += 1;
        queue.push_back(start);
    }
    while let Some(p) = queue.pop_front() {
        stats.visited += 1;
        for &x in g.neighbors(p, dir) {
            if absorb(idx, x) {
                stats.labels_changed += 1;
                queue.push_back(x);
            }
        }
    }
}

/// Removes `(u, v)` and retracts the bits it alone sustained.
pub fn delete_edge(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    u: VertexId,
    v: VertexId,
) -> Result<UpdateStats> {
    delete_edge_with(g, idx, u, v, DeleteOptions::default())
}

pub fn delete_edge_with(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    u: VertexId,
    v: VertexId,
    options: DeleteOptions,
) -> Result<UpdateStats> {
    idx.check_graph(g)?;
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if !g.has_edge(u, v) {
        return Err(Error::MissingEdge(u, v));
    }
    g.remove_edge(u, v)?;
    let mut stats = UpdateStats::default();
    let mut examined = vec![u, v];
    if u != v {
        retract(g, idx, u, v, Direction::Forward, &mut examined, &mut stats);
        retract(g, idx, v, u, Direction::Backward, &mut examined, &mut stats);
    }
    examined.sort_unstable();
    examined.dedup();
    stats.tainted = g.any_on_cycle(&examined);
    if stats.tainted {
        log::debug!("deletion of ({u}, {v}) touched a cycle");
        if options.rebuild_on_taint {
            *idx = idx.rebuild(g);
            stats.rebuilt = true;
        }
    }
    Ok(stats)
}

/// Removal set for `x`: the candidate bits `x` holds that no remaining
/// neighbour on the feeding side supplies and that are not `x`'s own seed.
fn removal_set(
    g: &DynamicGraph,
    idx: &DblIndex,
    family: LabelFamily,
    x: VertexId,
    candidates: &BitLabel,
) -> BitLabel {
    let mut r = candidates.clone();
    r.intersect_with(idx.label(family, x));
    if r.is_empty() {
        return r;
    }
    // in-labels are fed by predecessors, out-labels by successors
    let feeders = g.neighbors(x, family.direction().flip());
    for &p in feeders {
        if p == x {
            continue;
        }
        r.subtract(idx.label(family, p));
        if r.is_empty() {
            return r;
        }
    }
    if let Some(b) = idx.own_bit(family, x) {
        r.remove(b);
    }
    r
}

fn retract(
    g: &DynamicGraph,
    idx: &mut DblIndex,
    source: VertexId,
    start: VertexId,
    dir: Direction,
    examined: &mut Vec<VertexId>,
    stats: &mut UpdateStats,
) {
    let (dl_f, bl_f) = families(dir);
    let dl_seed = idx.label_set(dl_f, source);
    let bl_seed = idx.label_set(bl_f, source);

    let step = |idx: &mut DblIndex, x: VertexId, dl_c: &BitLabel, bl_c: &BitLabel| {
        let r_dl = removal_set(g, idx, dl_f, x, dl_c);
        let r_bl = removal_set(g, idx, bl_f, x, bl_c);
        if r_dl.is_empty() && r_bl.is_empty() {
            return None;
        }
        bits::subtract_from(idx.array_mut(dl_f).get_mut(x.index()), r_dl.words());
        bits::subtract_from(idx.array_mut(bl_f).get_mut(x.index()), r_bl.words());
        Some((r_dl, r_bl))
    };

    let mut queue = VecDeque::new();
    examined.push(start);
    if let Some(r) = step(idx, start, &dl_seed, &bl_seed) {
        stats.labels_changed += 1;
        queue.push_back((start, r));
    }
    // a vertex may be enqueued again with a different removal set; every
    // enqueue strips at least one bit, so this terminates
    while let Some((p, (r_dl, r_bl))) = queue.pop_front() {
        stats.visited += 1;
        for &x in g.neighbors(p, dir) {
            examined.push(x);
            if let Some(r) = step(idx, x, &r_dl, &r_bl) {
                stats.labels_changed += 1;
                queue.push_back((x, r));
            }
        }
    }
}

/// Adds a vertex with empty labels, then its edges one insertion at a time.
pub fn insert_vertex(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    out_edges: &[VertexId],
    in_edges: &[VertexId],
) -> Result<(VertexId, UpdateStats)> {
    idx.check_graph(g)?;
    for &w in out_edges.iter().chain(in_edges) {
        g.check_vertex(w)?;
    }
    let x = g.add_vertex();
    idx.push_vertex();
    let mut stats = UpdateStats {
        early_terminated: true,
        ..Default::default()
    };
    for &t in out_edges {
        stats.merge(insert_edge(g, idx, x, t)?);
    }
    for &s in in_edges {
        stats.merge(insert_edge(g, idx, s, x)?);
    }
    if out_edges.is_empty() && in_edges.is_empty() {
        stats.early_terminated = false;
    }
    Ok((x, stats))
}

/// Removes every edge incident to `v`; `v` stays as an isolated vertex whose
/// labels are reset to its own seed bits.
pub fn delete_vertex(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    v: VertexId,
) -> Result<UpdateStats> {
    delete_vertex_with(g, idx, v, DeleteOptions::default())
}

pub fn delete_vertex_with(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    v: VertexId,
    options: DeleteOptions,
) -> Result<UpdateStats> {
    idx.check_graph(g)?;
    g.check_vertex(v)?;
    let mut stats = UpdateStats::default();
    let outs = g.successors(v).to_vec();
    for t in outs {
        stats.merge(delete_edge_with(g, idx, v, t, options)?);
    }
    let ins = g.predecessors(v).to_vec();
    for s in ins {
        stats.merge(delete_edge_with(g, idx, s, v, options)?);
    }
    idx.reset_vertex(v);
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub family: LabelFamily,
    pub vertex: VertexId,
    pub bit: usize,
    /// Whether the index currently holds the bit.
    pub present: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks the fixpoint property of all four label families in
/// `O((k + k') * m)`. With `exact`, also compares every label against a
/// fresh build with the same landmarks and leaves.
pub fn verify_labels(g: &DynamicGraph, idx: &DblIndex, exact: bool) -> Result<VerifyReport> {
    idx.check_graph(g)?;
    let mut found = std::collections::BTreeSet::new();
    for family in LabelFamily::ALL {
        let width = idx.array(family).width();
        let mut expected = BitLabel::new(width);
        for x in g.vertices() {
            expected.clear_all();
            if let Some(b) = idx.own_bit(family, x) {
                expected.insert(b);
            }
            for &p in g.neighbors(x, family.direction().flip()) {
                expected.union_with(idx.label(family, p));
            }
            diff_bits(family, x, idx.label(family, x), expected.words(), &mut found);
        }
    }
    if exact {
        let fresh = idx.rebuild(g);
        for family in LabelFamily::ALL {
            for x in g.vertices() {
                diff_bits(family, x, idx.label(family, x), fresh.label(family, x), &mut found);
            }
        }
    }
    let violations: Vec<_> = found.into_iter().collect();
    Ok(VerifyReport {
        ok: violations.is_empty(),
        violations,
    })
}

fn diff_bits(
    family: LabelFamily,
    vertex: VertexId,
    actual: &[u64],
    expected: &[u64],
    out: &mut std::collections::BTreeSet<Violation>,
) {
    for (wi, (&a, &e)) in actual.iter().zip(expected).enumerate() {
        let mut d = a ^ e;
        while d != 0 {
            let tz = d.trailing_zeros() as usize;
            d &= d - 1;
            out.insert(Violation {
                family,
                vertex,
                bit: wi * 64 + tz,
                present: a >> tz & 1 == 1,
            });
        }
    }
}
