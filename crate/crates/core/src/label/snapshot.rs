//! Binary index snapshots.
//!
//! All integers are little-endian. Layout:
//!
//! ```text
//! magic        8 bytes   "DBLINDEX"
//! version      u32       1
//! n            u64       vertex count
//! k            u32       DL width (landmark count)
//! k'           u32       BL width (bucket count)
//! hash_seed    u64
//! strategy     u8        0=max 1=min 2=sum 3=product
//! leaf_r       u64       leaf threshold
//! landmarks    k x u32   vertex ids, in bit order
//! leaves_in    u64 count, then count x (u32 id, u32 bucket)
//! leaves_out   u64 count, then count x (u32 id, u32 bucket)
//! labels       n records of DL_in, DL_out (ceil(k/64) u64 each)
//!                         and BL_in, BL_out (ceil(k'/64) u64 each)
//! has_graph    u8        0 or 1
//! [graph]      n x u64 original ids, u64 m, m x (u32 src, u32 dst)
//! ```
//!
//! Leaf buckets are stored explicitly, so a snapshot restores bucket
//! assignments that did not come from the hash (for example override tables).

use std::io::{Read, Write};

use crate::bits::LabelArray;
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};
use crate::io::{IdMap, LoadedGraph};

use super::{DblIndex, IndexConfig, LabelFamily, LandmarkSet, LandmarkStrategy, LeafSets};

pub const MAGIC: &[u8; 8] = b"DBLINDEX";
pub const VERSION: u32 = 1;

pub struct Snapshot {
    pub index: DblIndex,
    pub graph: Option<LoadedGraph>,
}

struct Writer<W> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.inner.write_all(b)?;
        Ok(())
    }
    fn u8(&mut self, v: u8) -> Result<()> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.exact::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.exact()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.exact()?))
    }
    fn len(&mut self, what: &str, limit: u64) -> Result<usize> {
        let v = self.u64()?;
        if v > limit {
            return Err(Error::Snapshot(format!("{what} count {v} exceeds {limit}")));
        }
        Ok(v as usize)
    }
}

pub fn write_snapshot<W: Write>(
    out: W,
    index: &DblIndex,
    graph: Option<(&DynamicGraph, &IdMap)>,
) -> Result<()> {
    let mut w = Writer { inner: out };
    let cfg = index.config();
    let n = index.vertex_count();
    w.bytes(MAGIC)?;
    w.u32(VERSION)?;
    w.u64(n as u64)?;
    w.u32(cfg.k as u32)?;
    w.u32(cfg.k_prime as u32)?;
    w.u64(cfg.hash_seed)?;
    w.u8(cfg.landmark_strategy.code())?;
    w.u64(cfg.leaf_threshold)?;
    for &l in index.landmarks().as_slice() {
        w.u32(l.0)?;
    }
    let leaves = index.leaves();
    w.u64(leaves.leaves_in().len() as u64)?;
    for &s in leaves.leaves_in() {
        w.u32(s.0)?;
        w.u32(leaves.in_bucket(s).unwrap() as u32)?;
    }
    w.u64(leaves.leaves_out().len() as u64)?;
    for &t in leaves.leaves_out() {
        w.u32(t.0)?;
        w.u32(leaves.out_bucket(t).unwrap() as u32)?;
    }
    for v in 0..n {
        for family in LabelFamily::ALL {
            for &word in index.array(family).get(v) {
                w.u64(word)?;
            }
        }
    }
    match graph {
        None => w.u8(0)?,
        Some((g, ids)) => {
            if g.vertex_count() != n || ids.len() != n {
                return Err(Error::IndexMismatch {
                    index_vertices: n,
                    graph_vertices: g.vertex_count(),
                });
            }
            w.u8(1)?;
            for &o in ids.originals() {
                w.u64(o)?;
            }
            w.u64(g.edge_count() as u64)?;
            for (a, b) in g.edges() {
                w.u32(a.0)?;
                w.u32(b.0)?;
            }
        }
    }
    w.inner.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(source: R) -> Result<Snapshot> {
    let mut r = Reader { inner: source };
    if &r.exact::<8>()? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = r.len("vertex", u32::MAX as u64)?;
    let k = r.u32()? as usize;
    let k_prime = r.u32()? as usize;
    let hash_seed = r.u64()?;
    let landmark_strategy = LandmarkStrategy::from_code(r.u8()?)
        .ok_or_else(|| Error::Snapshot("unknown landmark strategy".into()))?;
    let leaf_threshold = r.u64()?;
    let config = IndexConfig {
        k,
        k_prime,
        landmark_strategy,
        leaf_threshold,
        hash_seed,
    };
    config.validate()?;

    let check_id = |v: u32| -> Result<VertexId> {
        if (v as usize) < n {
            Ok(VertexId(v))
        } else {
            Err(Error::Snapshot(format!("vertex id {v} out of range")))
        }
    };
    let mut landmarks = Vec::with_capacity(k);
    for _ in 0..k {
        landmarks.push(check_id(r.u32()?)?);
    }
    let landmarks = LandmarkSet::new(landmarks)?;
    let leaf_list = |r: &mut Reader<R>| -> Result<Vec<(VertexId, u32)>> {
        let count = r.len("leaf", n as u64)?;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let v = check_id(r.u32()?)?;
            let b = r.u32()?;
            if b as usize >= k_prime {
                return Err(Error::Snapshot(format!("bucket {b} out of range")));
            }
            out.push((v, b));
        }
        Ok(out)
    };
    let ins = leaf_list(&mut r)?;
    let outs = leaf_list(&mut r)?;
    let leaves = LeafSets::from_parts(n, &ins, &outs);

    let mut arrays = [
        LabelArray::new(k, n),
        LabelArray::new(k, n),
        LabelArray::new(k_prime, n),
        LabelArray::new(k_prime, n),
    ];
    for v in 0..n {
        for arr in arrays.iter_mut() {
            for word in arr.get_mut(v) {
                *word = r.u64()?;
            }
        }
    }
    let [dl_in, dl_out, bl_in, bl_out] = arrays;
    let index = DblIndex {
        config,
        landmarks,
        leaves,
        dl_in,
        dl_out,
        bl_in,
        bl_out,
    };

    let graph = match r.u8()? {
        0 => None,
        1 => {
            let mut originals = Vec::with_capacity(n);
            for _ in 0..n {
                originals.push(r.u64()?);
            }
            let m = r.len("edge", u64::MAX)?;
            let mut g = DynamicGraph::with_vertices(n);
            for _ in 0..m {
                let a = check_id(r.u32()?)?;
                let b = check_id(r.u32()?)?;
                g.add_edge(a, b)?;
            }
            Some(LoadedGraph {
                graph: g,
                ids: IdMap::from_originals(originals),
            })
        }
        other => return Err(Error::Snapshot(format!("bad graph flag {other}"))),
    };
    Ok(Snapshot { index, graph })
}

/// Whether `bytes` starts with the snapshot magic.
pub fn is_snapshot(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;
    use crate::workload::generators;

    #[test]
    fn toy_roundtrip_keeps_override_buckets() {
        let g = toy::graph();
        let idx = toy::index(&g);
        let ids = IdMap::from_originals((1..=11).collect());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &idx, Some((&g, &ids))).unwrap();
        assert!(is_snapshot(&buf));
        let snap = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(snap.index, idx);
        let lg = snap.graph.unwrap();
        assert_eq!(lg.graph, g);
        assert_eq!(lg.ids, ids);
    }

    #[test]
    fn header_layout() {
        let g = toy::graph();
        let idx = toy::index(&g);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &idx, None).unwrap();
        assert_eq!(&buf[0..8], b"DBLINDEX");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 11);
        assert_eq!(u32::from_le_bytes(buf[20..24].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[24..28].try_into().unwrap()), 2);
        // landmarks v5, v8 follow the fixed 45-byte header
        assert_eq!(u32::from_le_bytes(buf[45..49].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(buf[49..53].try_into().unwrap()), 7);
        // 3 source leaves + 2 sink leaves, 11 records of 4 one-word labels, flag
        let expected = 53 + 8 + 3 * 8 + 8 + 2 * 8 + 11 * 4 * 8 + 1;
        assert_eq!(buf.len(), expected);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_snapshot(&b"NOTANIDX"[..]).is_err());
        let g = generators::random_digraph(40, 2.0, 1);
        let idx = DblIndex::build(&g, IndexConfig { k: 8, k_prime: 8, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &idx, None).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(read_snapshot(buf.as_slice()), Err(Error::Snapshot(_))));
    }
}
