//! Text loaders for edge lists and timestamped edge streams.
//!
//! Both formats are whitespace separated, one record per line. Lines that are
//! empty or start with `#` (after leading whitespace) are skipped. Streams
//! starting with the gzip magic bytes are decompressed transparently when the
//! `gzip` feature is enabled.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

/// Maps arbitrary external ids onto dense `0..n` ids in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    to_dense: HashMap<u64, VertexId>,
    originals: Vec<u64>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_originals(originals: Vec<u64>) -> Self {
        let to_dense = originals
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, VertexId::from(i)))
            .collect();
        IdMap { to_dense, originals }
    }

    pub fn intern(&mut self, original: u64) -> VertexId {
        if let Some(&id) = self.to_dense.get(&original) {
            return id;
        }
        let id = VertexId::from(self.originals.len());
        self.originals.push(original);
        self.to_dense.insert(original, id);
        id
    }

    pub fn get(&self, original: u64) -> Option<VertexId> {
        self.to_dense.get(&original).copied()
    }

    pub fn original(&self, v: VertexId) -> u64 {
        self.originals[v.index()]
    }

    pub fn originals(&self) -> &[u64] {
        &self.originals
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }
}

/// A graph together with the external ids it was loaded from.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: DynamicGraph,
    pub ids: IdMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub timestamp: u64,
}

#[derive(Clone, Debug)]
pub struct TemporalStream {
    pub edges: Vec<TemporalEdge>,
    pub ids: IdMap,
}

/// Wraps `source` in a gzip decoder when it starts with the gzip magic.
pub fn maybe_decompress<'a, R: Read + 'a>(source: R) -> Result<Box<dyn BufRead + 'a>> {
    let mut reader = BufReader::new(source);
    let head = reader.fill_buf()?;
    let gz = head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b;
    if !gz {
        return Ok(Box::new(reader));
    }
    #[cfg(feature = "gzip")]
    {
        Ok(Box::new(BufReader::new(flate2::read::MultiGzDecoder::new(
            reader,
        ))))
    }
    #[cfg(not(feature = "gzip"))]
    {
        Err(Error::Parse {
            line: 0,
            message: "gzip input requires the `gzip` feature".into(),
        })
    }
}

pub fn open(path: impl AsRef<Path>) -> Result<Box<dyn BufRead>> {
    maybe_decompress(File::open(path)?)
}

pub(crate) fn records<R: BufRead>(
    source: R,
) -> impl Iterator<Item = Result<(usize, Vec<String>)>> {
    source.lines().enumerate().filter_map(|(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::Io(e))),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            return None;
        }
        Some(Ok((
            i + 1,
            trimmed.split_whitespace().map(str::to_owned).collect(),
        )))
    })
}

pub(crate) fn parse_u64(field: &str, line: usize, what: &str) -> Result<u64> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {field:?}"),
    })
}

/// Loads a `src dst` edge list, densely remapping ids and collapsing
/// duplicate edges. Extra columns are rejected.
pub fn load_edge_list<R: Read>(source: R) -> Result<LoadedGraph> {
    let mut ids = IdMap::new();
    let mut g = DynamicGraph::new();
    for rec in records(maybe_decompress(source)?) {
        let (line, fields) = rec?;
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let a = ids.intern(parse_u64(&fields[0], line, "source id")?);
        let b = ids.intern(parse_u64(&fields[1], line, "target id")?);
        while g.vertex_count() < ids.len() {
            g.add_vertex();
        }
        g.add_edge(a, b)?;
    }
    Ok(LoadedGraph { graph: g, ids })
}

pub fn load_edge_list_file(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    load_edge_list(File::open(path)?)
}

/// Loads `src dst timestamp` lines, sorted by timestamp (stable for ties).
pub fn load_temporal_edge_list<R: Read>(source: R) -> Result<TemporalStream> {
    let mut ids = IdMap::new();
    let mut edges = Vec::new();
    for rec in records(maybe_decompress(source)?) {
        let (line, fields) = rec?;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let src = ids.intern(parse_u64(&fields[0], line, "source id")?);
        let dst = ids.intern(parse_u64(&fields[1], line, "target id")?);
        let timestamp = parse_u64(&fields[2], line, "timestamp")?;
        edges.push(TemporalEdge { src, dst, timestamp });
    }
    edges.sort_by_key(|e| e.timestamp);
    Ok(TemporalStream { edges, ids })
}

pub fn load_temporal_edge_list_file(path: impl AsRef<Path>) -> Result<TemporalStream> {
    load_temporal_edge_list(File::open(path)?)
}

/// Writes `g` as an edge list using the original ids from `ids`.
/// Isolated vertices are not representable and are dropped.
pub fn write_edge_list<W: Write>(g: &DynamicGraph, ids: &IdMap, mut out: W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", ids.original(u), ids.original(v))?;
    }
    Ok(())
}

/// Parses a `u v` pair file in original-id space.
pub fn load_pairs<R: Read>(source: R, ids: &IdMap) -> Result<Vec<(VertexId, VertexId)>> {
    let mut out = Vec::new();
    for rec in records(maybe_decompress(source)?) {
        let (line, fields) = rec?;
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let resolve = |f: &str| -> Result<VertexId> {
            let raw = parse_u64(f, line, "vertex id")?;
            ids.get(raw).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown vertex id {raw}"),
            })
        };
        let u = resolve(&fields[0])?;
        let v = resolve(&fields[1])?;
        out.push((u, v));
    }
    Ok(out)
}
