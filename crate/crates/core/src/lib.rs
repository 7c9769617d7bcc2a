//! Dynamic reachability index for directed graphs.
//!
//! Two complementary bit-vector labels are kept per vertex. Landmark labels
//! (DL) record which of `k` high-centrality vertices reach, or are reached
//! by, the vertex; a shared landmark proves reachability. Leaf labels (BL)
//! record hashed buckets of the sources and sinks around the vertex; a
//! bucket missing on the wrong side proves non-reachability. Queries the
//! labels cannot settle fall back to a BFS that the labels prune.
//!
//! ```
//! use dbl_core::{query, toy, AnsweredBy};
//!
//! let g = toy::graph();
//! let idx = toy::index(&g);
//! let out = query(&g, &idx, toy::v(1), toy::v(10)).unwrap();
//! assert!(out.reachable);
//! assert_eq!(out.answered_by, AnsweredBy::DlPositive);
//! ```
//!
//! Edge insertions keep the labels exact. Deletions are supported on a best
//! effort basis: exact on acyclic graphs, flagged as tainted when the
//! affected region contains a cycle.

pub mod bits;
pub mod error;
pub mod graph;
pub mod io;
pub mod label;
pub mod query;
pub mod toy;
pub mod update;
pub mod workload;

pub use bits::{BitLabel, LabelArray};
pub use error::{Error, Result};
pub use graph::{bidirectional_bfs, oracle_reach, Direction, DynamicGraph, VertexId};
pub use io::{IdMap, LoadedGraph, TemporalEdge, TemporalStream};
pub use label::snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use label::{DblIndex, IndexConfig, LabelFamily, LandmarkSet, LandmarkStrategy, LeafHasher, LeafSets};
pub use query::{explain, query, query_batch, AnsweredBy, BatchResult, BatchStats, Querier, QueryOptions, QueryOutcome};
pub use update::{
    delete_edge, delete_edge_with, delete_vertex, delete_vertex_with, insert_edge, insert_vertex,
    verify_labels, DeleteOptions, UpdateStats, Violation, VerifyReport,
};
pub use workload::{BenchReport, EventKind, WorkloadEvent};
