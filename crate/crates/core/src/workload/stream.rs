//! Text update streams: one `+ u v`, `- u v` or `? u v` per line, in
//! original-id space.

use std::io::Read;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};
use crate::io::{self, IdMap};
use crate::label::DblIndex;
use crate::query::{AnsweredBy, Querier};
use crate::update::{self, DeleteOptions, UpdateStats};

use super::EventKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamLine {
    pub line: usize,
    pub kind: EventKind,
    pub u: u64,
    pub v: u64,
}

pub fn parse_update_stream<R: Read>(source: R) -> Result<Vec<StreamLine>> {
    let mut out = Vec::new();
    for rec in io::records(io::maybe_decompress(source)?) {
        let (line, fields) = rec?;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `<op> u v`, found {} fields", fields.len()),
            });
        }
        let kind = match fields[0].as_str() {
            "+" => EventKind::Insert,
            "-" => EventKind::Delete,
            "?" => EventKind::Query,
            op => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown operation {op:?}"),
                })
            }
        };
        out.push(StreamLine {
            line,
            kind,
            u: io::parse_u64(&fields[1], line, "vertex id")?,
            v: io::parse_u64(&fields[2], line, "vertex id")?,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StreamOptions {
    pub allow_delete: bool,
    pub delete: DeleteOptions,
    /// Keep one [`EventRecord`] per line.
    pub record: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub line: usize,
    pub kind: EventKind,
    pub u: u64,
    pub v: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<UpdateStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reachable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answered_by: Option<AnsweredBy>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub inserts: u64,
    pub deletes: u64,
    pub queries: u64,
    pub created_vertices: u64,
    pub insert_ms: f64,
    pub delete_ms: f64,
    pub query_ms: f64,
    pub visited: u64,
    pub labels_changed: u64,
    pub early_terminated: u64,
    pub tainted: u64,
    pub reachable: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<EventRecord>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn resolve(ids: &IdMap, raw: u64, line: usize) -> Result<VertexId> {
    ids.get(raw).ok_or_else(|| Error::Parse {
        line,
        message: format!("unknown vertex id {raw}"),
    })
}

/// Applies `events` in order. Insertions may name new ids, which become new
/// vertices; deletions and queries must name known ones. Deletions are
/// refused unless `allow_delete` is set.
pub fn apply_stream(
    g: &mut DynamicGraph,
    idx: &mut DblIndex,
    ids: &mut IdMap,
    events: &[StreamLine],
    options: StreamOptions,
) -> Result<StreamSummary> {
    idx.check_graph(g)?;
    if ids.len() != g.vertex_count() {
        return Err(Error::Config(format!(
            "id map has {} entries for {} vertices",
            ids.len(),
            g.vertex_count()
        )));
    }
    if !options.allow_delete {
        if let Some(ev) = events.iter().find(|e| e.kind == EventKind::Delete) {
            return Err(Error::Config(format!(
                "line {}: deletions are experimental and need allow_delete",
                ev.line
            )));
        }
    }
    let mut sum = StreamSummary::default();
    let mut i = 0;
    while i < events.len() {
        let ev = events[i];
        match ev.kind {
            EventKind::Insert => {
                let t = Instant::now();
                for raw in [ev.u, ev.v] {
                    if ids.get(raw).is_none() {
                        ids.intern(raw);
                        update::insert_vertex(g, idx, &[], &[])?;
                        sum.created_vertices += 1;
                    }
                }
                let (u, v) = (resolve(ids, ev.u, ev.line)?, resolve(ids, ev.v, ev.line)?);
                let stats = update::insert_edge(g, idx, u, v)?;
                sum.insert_ms += ms_since(t);
                sum.inserts += 1;
                sum.early_terminated += stats.early_terminated as u64;
                absorb(&mut sum, ev, stats, options.record);
                i += 1;
            }
            EventKind::Delete => {
                let (u, v) = (resolve(ids, ev.u, ev.line)?, resolve(ids, ev.v, ev.line)?);
                let t = Instant::now();
                let stats = update::delete_edge_with(g, idx, u, v, options.delete).map_err(|e| match e {
                    Error::MissingEdge(..) => Error::Parse {
                        line: ev.line,
                        message: format!("edge {} {} is not in the graph", ev.u, ev.v),
                    },
                    other => other,
                })?;
                sum.delete_ms += ms_since(t);
                sum.deletes += 1;
                sum.tainted += stats.tainted as u64;
                absorb(&mut sum, ev, stats, options.record);
                i += 1;
            }
            EventKind::Query => {
                // run a maximal run of queries with one scratch buffer
                let end = events[i..]
                    .iter()
                    .position(|e| e.kind != EventKind::Query)
                    .map_or(events.len(), |p| i + p);
                let t = Instant::now();
                let mut q = Querier::new(g, idx)?;
                for ev in &events[i..end] {
                    let (u, v) = (resolve(ids, ev.u, ev.line)?, resolve(ids, ev.v, ev.line)?);
                    let out = q.query(u, v)?;
                    sum.queries += 1;
                    sum.reachable += out.reachable as u64;
                    if options.record {
                        sum.records.push(EventRecord {
                            line: ev.line,
                            kind: ev.kind,
                            u: ev.u,
                            v: ev.v,
                            stats: None,
                            reachable: Some(out.reachable),
                            answered_by: Some(out.answered_by),
                        });
                    }
                }
                sum.query_ms += ms_since(t);
                i = end;
            }
        }
    }
    Ok(sum)
}

fn absorb(sum: &mut StreamSummary, ev: StreamLine, stats: UpdateStats, record: bool) {
    sum.visited += stats.visited;
    sum.labels_changed += stats.labels_changed;
    if record {
        sum.records.push(EventRecord {
            line: ev.line,
            kind: ev.kind,
            u: ev.u,
            v: ev.v,
            stats: Some(stats),
            reachable: None,
            answered_by: None,
        });
    }
}
