use std::io;

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range (graph has {vertex_count} vertices)")]
    VertexOutOfRange { vertex: VertexId, vertex_count: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index covers {index_vertices} vertices but graph has {graph_vertices}")]
    IndexMismatch {
        index_vertices: usize,
        graph_vertices: usize,
    },

    #[error("edge ({0}, {1}) is not present")]
    MissingEdge(VertexId, VertexId),

    #[error("workload generation exhausted: {0}")]
    Exhausted(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
