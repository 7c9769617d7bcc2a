//! Workloads: generators, update streams, benchmark reports and temporal
//! replay.

pub mod generators;
mod report;
mod stream;

use serde::{Deserialize, Serialize};

use crate::graph::VertexId;

pub use generators::{DistanceClass, DistanceQueries};
pub use report::{
    check_against_oracle, replay_temporal, run_bench, run_bench_prebuilt, verify_random,
    BenchReport, BenchSpec, DistanceRow, GraphStats, OracleCheck, QueryPhase, Replay,
    ReplayOptions, ReplayRow, UpdatePhase, VerifySpec, VerifySummary, REPORT_SCHEMA_VERSION,
};
pub use stream::{apply_stream, parse_update_stream, EventRecord, StreamLine, StreamOptions, StreamSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Insert,
    Delete,
    Query,
}

impl EventKind {
    pub fn symbol(self) -> char {
        match self {
            EventKind::Insert => '+',
            EventKind::Delete => '-',
            EventKind::Query => '?',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkloadEvent {
    pub kind: EventKind,
    pub u: VertexId,
    pub v: VertexId,
    pub timestamp: Option<u64>,
}

impl WorkloadEvent {
    pub fn new(kind: EventKind, u: VertexId, v: VertexId) -> Self {
        WorkloadEvent {
            kind,
            u,
            v,
            timestamp: None,
        }
    }
}
