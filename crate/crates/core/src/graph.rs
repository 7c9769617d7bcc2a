//! Mutable directed graph with forward and reverse adjacency.
//!
//! Adjacency lists keep insertion order. Duplicate edges are rejected at
//! insert time, so every list is a set. Self-loops are stored like any other
//! edge; they never change reachability.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex identifier, `0..vertex_count`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    #[inline]
    fn from(v: usize) -> Self {
        VertexId(v as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicGraph {
    forward: Vec<Vec<VertexId>>,
    reverse: Vec<Vec<VertexId>>,
    edge_count: usize,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices(n: usize) -> Self {
        DynamicGraph {
            forward: vec![Vec::new(); n],
            reverse: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge iterator, collapsing duplicates.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut g = Self::with_vertices(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.forward.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn average_degree(&self) -> f64 {
        if self.forward.is_empty() {
            0.0
        } else {
            self.edge_count as f64 / self.forward.len() as f64
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId::from)
    }

    /// Successors of `v`, in insertion order.
    #[inline]
    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.forward[v.index()]
    }

    /// Predecessors of `v`, in insertion order.
    #[inline]
    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.reverse[v.index()]
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.forward[v.index()].len()
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.reverse[v.index()].len()
    }

    /// All edges in forward-adjacency order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.forward
            .iter()
            .enumerate()
            .flat_map(|(u, succ)| succ.iter().map(move |&v| (VertexId::from(u), v)))
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: self.vertex_count(),
            })
        }
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        if u.index() >= self.vertex_count() || v.index() >= self.vertex_count() {
            return false;
        }
        // scan whichever list is shorter
        if self.out_degree(u) <= self.in_degree(v) {
            self.forward[u.index()].contains(&v)
        } else {
            self.reverse[v.index()].contains(&u)
        }
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId::from(self.forward.len());
        self.forward.push(Vec::new());
        self.reverse.push(Vec::new());
        id
    }

    /// Inserts `(u, v)`. Returns `false` when the edge already exists.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if self.has_edge(u, v) {
            return Ok(false);
        }
        self.forward[u.index()].push(v);
        self.reverse[v.index()].push(u);
        self.edge_count += 1;
        Ok(true)
    }

    /// Removes `(u, v)`. Returns `false` when the edge was absent.
    ///
    /// Removal preserves the relative order of the remaining neighbours.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let succ = &mut self.forward[u.index()];
        let Some(pos) = succ.iter().position(|&x| x == v) else {
            return Ok(false);
        };
        succ.remove(pos);
        let pred = &mut self.reverse[v.index()];
        let pos = pred
            .iter()
            .position(|&x| x == u)
            .expect("reverse adjacency out of sync");
        pred.remove(pos);
        self.edge_count -= 1;
        Ok(true)
    }

    /// Full scan of the adjacency symmetry invariant. Returns a description of
    /// the first inconsistency found.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let mut fwd_total = 0;
        for (u, succ) in self.forward.iter().enumerate() {
            let u = VertexId::from(u);
            for (i, &v) in succ.iter().enumerate() {
                if succ[..i].contains(&v) {
                    return Err(format!("duplicate successor {v} of {u}"));
                }
                if !self.reverse[v.index()].contains(&u) {
                    return Err(format!("edge ({u}, {v}) missing from reverse adjacency"));
                }
            }
            fwd_total += succ.len();
        }
        let mut rev_total = 0;
        for (v, pred) in self.reverse.iter().enumerate() {
            let v = VertexId::from(v);
            for (i, &u) in pred.iter().enumerate() {
                if pred[..i].contains(&u) {
                    return Err(format!("duplicate predecessor {u} of {v}"));
                }
                if !self.forward[u.index()].contains(&v) {
                    return Err(format!("edge ({u}, {v}) missing from forward adjacency"));
                }
            }
            rev_total += pred.len();
        }
        if fwd_total != self.edge_count || rev_total != self.edge_count {
            return Err(format!(
                "edge count {} disagrees with list totals {fwd_total}/{rev_total}",
                self.edge_count
            ));
        }
        Ok(())
    }

    /// Plain forward BFS. Reachability is reflexive.
    pub fn reaches(&self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return true;
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::new();
        seen[u.index()] = true;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            for &y in self.successors(x) {
                if y == v {
                    return true;
                }
                if !std::mem::replace(&mut seen[y.index()], true) {
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// Every vertex reachable from `u` (including `u`), as a membership mask.
    pub fn descendants(&self, u: VertexId) -> Vec<bool> {
        self.sweep(u, Direction::Forward)
    }

    /// Every vertex that reaches `v` (including `v`), as a membership mask.
    pub fn ancestors(&self, v: VertexId) -> Vec<bool> {
        self.sweep(v, Direction::Backward)
    }

    fn sweep(&self, start: VertexId, dir: Direction) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::new();
        seen[start.index()] = true;
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            for &y in self.neighbors(x, dir) {
                if !std::mem::replace(&mut seen[y.index()], true) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    #[inline]
    pub(crate) fn neighbors(&self, v: VertexId, dir: Direction) -> &[VertexId] {
        match dir {
            Direction::Forward => self.successors(v),
            Direction::Backward => self.predecessors(v),
        }
    }

    /// Bidirectional BFS baseline: grows a forward frontier from `u` and a
    /// backward frontier from `v`, always expanding the smaller one.
    pub fn bidirectional_reaches(&self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return true;
        }
        const FWD: u8 = 1;
        const BWD: u8 = 2;
        let mut mark = vec![0u8; self.vertex_count()];
        mark[u.index()] = FWD;
        mark[v.index()] = BWD;
        let mut fwd = vec![u];
        let mut bwd = vec![v];
        let mut next = Vec::new();
        while !fwd.is_empty() && !bwd.is_empty() {
            let (frontier, dir, own, other) = if fwd.len() <= bwd.len() {
                (&mut fwd, Direction::Forward, FWD, BWD)
            } else {
                (&mut bwd, Direction::Backward, BWD, FWD)
            };
            next.clear();
            for &x in frontier.iter() {
                for &y in self.neighbors(x, dir) {
                    let m = mark[y.index()];
                    if m & other != 0 {
                        return true;
                    }
                    if m & own == 0 {
                        mark[y.index()] |= own;
                        next.push(y);
                    }
                }
            }
            std::mem::swap(frontier, &mut next);
        }
        false
    }

    /// Shortest-path hop distances from `u`, `None` for unreachable vertices.
    /// Stops expanding once `max_hops` levels are settled.
    pub fn hop_distances(&self, u: VertexId, max_hops: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[u.index()] = Some(0);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x.index()].unwrap();
            if max_hops.is_some_and(|cap| d >= cap) {
                continue;
            }
            for &y in self.successors(x) {
                if dist[y.index()].is_none() {
                    dist[y.index()] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Whether any of `roots` lies on a directed cycle of length >= 2.
    ///
    /// Runs Tarjan's algorithm over the part of the graph reachable from
    /// `roots` only, so the cost is proportional to that region.
    pub fn any_on_cycle(&self, roots: &[VertexId]) -> bool {
        use std::collections::HashMap;

        struct Node {
            index: u32,
            low: u32,
            on_stack: bool,
        }
        let mut state: HashMap<VertexId, Node> = HashMap::new();
        let mut stack: Vec<VertexId> = Vec::new();
        let mut cyclic: HashMap<VertexId, bool> = HashMap::new();
        let mut counter = 0u32;
        // (vertex, next successor position)
        let mut call: Vec<(VertexId, usize)> = Vec::new();

        for &root in roots {
            if state.contains_key(&root) {
                continue;
            }
            call.push((root, 0));
            state.insert(root, Node { index: counter, low: counter, on_stack: true });
            stack.push(root);
            counter += 1;
            while let Some(&mut (x, ref mut pos)) = call.last_mut() {
                let succ = self.successors(x);
                if *pos < succ.len() {
                    let y = succ[*pos];
                    *pos += 1;
                    match state.get(&y) {
                        None => {
                            state.insert(y, Node { index: counter, low: counter, on_stack: true });
                            stack.push(y);
                            counter += 1;
                            call.push((y, 0));
                        }
                        Some(ny) if ny.on_stack => {
                            let yi = ny.index;
                            let nx = state.get_mut(&x).unwrap();
                            nx.low = nx.low.min(yi);
                        }
                        Some(_) => {}
                    }
                    continue;
                }
                call.pop();
                let (xi, xl) = {
                    let nx = &state[&x];
                    (nx.index, nx.low)
                };
                if let Some(&(parent, _)) = call.last() {
                    let np = state.get_mut(&parent).unwrap();
                    np.low = np.low.min(xl);
                }
                if xi == xl {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        state.get_mut(&w).unwrap().on_stack = false;
                        members.push(w);
                        if w == x {
                            break;
                        }
                    }
                    let nontrivial = members.len() > 1;
                    for w in members {
                        cyclic.insert(w, nontrivial);
                    }
                }
            }
        }
        roots.iter().any(|r| cyclic.get(r).copied().unwrap_or(false))
    }

    /// Whether the graph has no directed cycle (self-loops count as cycles).
    pub fn is_acyclic(&self) -> bool {
        let n = self.vertex_count();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.reverse[v].len()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(x) = stack.pop() {
            removed += 1;
            for &y in &self.forward[x] {
                indeg[y.index()] -= 1;
                if indeg[y.index()] == 0 {
                    stack.push(y.index());
                }
            }
        }
        removed == n
    }
}

/// Traversal direction: along edges of the graph, or of its reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Convenience wrapper: BFS reachability oracle.
pub fn oracle_reach(g: &DynamicGraph, u: VertexId, v: VertexId) -> bool {
    g.reaches(u, v)
}

/// Convenience wrapper: bidirectional BFS baseline.
pub fn bidirectional_bfs(g: &DynamicGraph, u: VertexId, v: VertexId) -> bool {
    g.bidirectional_reaches(u, v)
}
