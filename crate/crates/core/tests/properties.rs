use std::collections::VecDeque;

use proptest::prelude::*;

use dbl_core::label::LabelFamily;
use dbl_core::workload::generators;
use dbl_core::{
    bidirectional_bfs, delete_edge, delete_vertex, insert_edge, insert_vertex, oracle_reach, read_snapshot,
    verify_labels, write_snapshot, DblIndex, DynamicGraph, IdMap, IndexConfig, LandmarkSet,
    LandmarkStrategy, LeafSets, Querier, VertexId,
};

fn closure(g: &DynamicGraph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut c = vec![vec![false; n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in g.edges() {
        c[a.index()][b.index()] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if c[i][k] {
                for j in 0..n {
                    if c[k][j] {
                        c[i][j] = true;
                    }
                }
            }
        }
    }
    c
}

fn bfs(g: &DynamicGraph, from: VertexId, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    seen[from.index()] = true;
    let mut q = VecDeque::from([from]);
    while let Some(x) = q.pop_front() {
        let next = if forward { g.successors(x) } else { g.predecessors(x) };
        for &y in next {
            if !seen[y.index()] {
                seen[y.index()] = true;
                q.push_back(y);
            }
        }
    }
    seen
}

fn sorted_edges(g: &DynamicGraph) -> Vec<(VertexId, VertexId)> {
    let mut e: Vec<_> = g.edges().collect();
    e.sort_unstable();
    e
}

fn cfg(k: usize, k_prime: usize) -> IndexConfig {
    IndexConfig { k, k_prime, ..IndexConfig::default() }
}

fn all_pairs_ok(g: &DynamicGraph, idx: &DblIndex) -> Result<(), TestCaseError> {
    let mut q = Querier::new(g, idx).unwrap();
    for u in g.vertices() {
        let reach = bfs(g, u, true);
        for w in g.vertices() {
            prop_assert_eq!(q.query(u, w).unwrap().reachable, reach[w.index()], "q({},{})", u, w);
        }
    }
    Ok(())
}

fn bits_subset(a: &DblIndex, b: &DblIndex, g: &DynamicGraph) -> bool {
    LabelFamily::ALL.iter().all(|&f| {
        g.vertices().all(|x| {
            a.label(f, x)
                .iter()
                .zip(b.label(f, x))
                .all(|(p, q)| p & !q == 0)
        })
    })
}

#[test]
fn reachability_matches_closure() {
    let g = generators::random_digraph(50, 1.8, 77);
    let c = closure(&g);
    for u in g.vertices() {
        for w in g.vertices() {
            assert_eq!(g.reaches(u, w), c[u.index()][w.index()]);
            assert_eq!(oracle_reach(&g, u, w), c[u.index()][w.index()]);
        }
    }
}

#[test]
fn labels_equal_per_seed_bfs() {
    for seed in 0..8 {
        let g = if seed % 2 == 0 {
            generators::random_digraph(150, 2.5, seed)
        } else {
            generators::random_dag(150, 3.0, seed)
        };
        let idx = DblIndex::build(&g, cfg(8, 16)).unwrap();
        let n = g.vertex_count();
        let mut dl_in = vec![vec![]; n];
        let mut dl_out = vec![vec![]; n];
        for (bit, &l) in idx.landmarks().as_slice().iter().enumerate() {
            for (x, r) in bfs(&g, l, true).into_iter().enumerate() {
                if r {
                    dl_in[x].push(bit);
                }
            }
            for (x, r) in bfs(&g, l, false).into_iter().enumerate() {
                if r {
                    dl_out[x].push(bit);
                }
            }
        }
        let mut bl_in = vec![std::collections::BTreeSet::new(); n];
        let mut bl_out = vec![std::collections::BTreeSet::new(); n];
        for &s in idx.leaves().leaves_in() {
            let b = idx.leaves().in_bucket(s).unwrap();
            for (x, r) in bfs(&g, s, true).into_iter().enumerate() {
                if r {
                    bl_in[x].insert(b);
                }
            }
        }
        for &t in idx.leaves().leaves_out() {
            let b = idx.leaves().out_bucket(t).unwrap();
            for (x, r) in bfs(&g, t, false).into_iter().enumerate() {
                if r {
                    bl_out[x].insert(b);
                }
            }
        }
        for x in g.vertices() {
            let i = x.index();
            let got = |f| idx.label_set(f, x).iter().collect::<Vec<_>>();
            assert_eq!(got(LabelFamily::DlIn), dl_in[i]);
            assert_eq!(got(LabelFamily::DlOut), dl_out[i]);
            assert_eq!(got(LabelFamily::BlIn), bl_in[i].iter().copied().collect::<Vec<_>>());
            assert_eq!(got(LabelFamily::BlOut), bl_out[i].iter().copied().collect::<Vec<_>>());
        }
    }
}

#[test]
fn label_evidence_is_sound() {
    for seed in 0..6 {
        let g = generators::random_digraph(120, 1.0 + seed as f64, seed);
        let idx = DblIndex::build(&g, cfg(8, 8)).unwrap();
        for u in g.vertices() {
            let reach = bfs(&g, u, true);
            for w in g.vertices() {
                if idx.dl_intersec(u, w) {
                    assert!(reach[w.index()]);
                }
                if !idx.bl_contain(u, w) {
                    assert!(!reach[w.index()]);
                }
            }
        }
    }
}

#[test]
fn star_center_ranks_first() {
    let mut g = DynamicGraph::with_vertices(9);
    for i in 1..5 {
        g.add_edge(VertexId(i), VertexId(0)).unwrap();
        g.add_edge(VertexId(0), VertexId(i + 4)).unwrap();
    }
    g.add_edge(VertexId(1), VertexId(5)).unwrap();
    for s in [LandmarkStrategy::Product, LandmarkStrategy::Sum, LandmarkStrategy::Min] {
        assert_eq!(LandmarkSet::select(&g, 1, s).unwrap().as_slice(), &[VertexId(0)]);
    }
}

#[test]
fn leaf_threshold_is_monotone() {
    let g = generators::random_digraph(30, 1.5, 4);
    let h = IndexConfig::default().leaf_hasher();
    let strict = LeafSets::select(&g, 0, &h);
    let loose = LeafSets::select(&g, 4, &h);
    for s in strict.leaves_in() {
        assert!(loose.leaves_in().contains(s));
    }
    for t in strict.leaves_out() {
        assert!(loose.leaves_out().contains(t));
    }
    assert!(loose.leaves_in().len() + loose.leaves_out().len() > strict.leaves_in().len() + strict.leaves_out().len());
}

#[test]
fn hub_deletion_on_dag_matches_rebuild() {
    for seed in 0..5 {
        let mut g = generators::random_dag(120, 4.0, seed);
        let mut idx = DblIndex::build(&g, cfg(8, 8)).unwrap();
        let hub = g.vertices().max_by_key(|&x| g.in_degree(x) * g.out_degree(x)).unwrap();
        let stats = delete_vertex(&mut g, &mut idx, hub).unwrap();
        assert!(!stats.tainted);
        assert_eq!(g.in_degree(hub) + g.out_degree(hub), 0);
        assert!(idx.labels_equal(&idx.rebuild(&g)));
    }
}

#[test]
fn snapshot_roundtrip_random() {
    let g = generators::random_digraph(300, 3.0, 12);
    let idx = DblIndex::build(&g, cfg(70, 130)).unwrap();
    let ids = IdMap::from_originals((0..300).map(|i| i * 7 + 1).collect());
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &idx, Some((&g, &ids))).unwrap();
    let snap = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(snap.index, idx);
    assert_eq!(sorted_edges(&snap.graph.unwrap().graph), sorted_edges(&g));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn insertions_match_rebuild(
        seed in any::<u64>(),
        n in 20usize..120,
        d in 0.5f64..6.0,
        inserts in 1usize..200,
        k in prop_oneof![Just(8usize), Just(64)],
        kp in prop_oneof![Just(8usize), Just(64)],
    ) {
        let mut g = generators::random_digraph(n, d, seed);
        let mut idx = DblIndex::build(&g, cfg(k.min(n), kp)).unwrap();
        let avail = n * (n - 1) - g.edge_count();
        let events = generators::gen_insert_workload(&g, inserts.min(avail), seed ^ 1).unwrap();
        for e in &events {
            let before = idx.clone();
            let s = insert_edge(&mut g, &mut idx, e.u, e.v).unwrap();
            prop_assert!(s.labels_changed <= s.visited + 1);
            prop_assert!(bits_subset(&before, &idx, &g), "insertion cleared a bit");
        }
        prop_assert!(idx.labels_equal(&idx.rebuild(&g)));
        prop_assert!(verify_labels(&g, &idx, false).unwrap().ok);
        all_pairs_ok(&g, &idx)?;
    }

    #[test]
    fn dag_deletions_match_rebuild(seed in any::<u64>(), n in 20usize..120, d in 1.0f64..6.0) {
        let mut g = generators::random_dag(n, d, seed);
        let mut idx = DblIndex::build(&g, cfg(8, 8)).unwrap();
        let count = g.edge_count() / 2;
        let events = generators::gen_delete_workload(&g, count, seed ^ 2).unwrap();
        for e in &events {
            let before = idx.clone();
            let s = delete_edge(&mut g, &mut idx, e.u, e.v).unwrap();
            prop_assert!(!s.tainted);
            prop_assert!(s.labels_changed <= s.visited + 1);
            prop_assert!(bits_subset(&idx, &before, &g), "deletion set a bit");
            prop_assert!(idx.labels_equal(&idx.rebuild(&g)));
        }
        all_pairs_ok(&g, &idx)?;
    }

    #[test]
    fn cyclic_deletions_without_taint_stay_exact(seed in any::<u64>(), n in 10usize..60, d in 0.5f64..3.0) {
        let mut g = generators::random_digraph(n, d, seed);
        let mut idx = DblIndex::build(&g, cfg(4, 8)).unwrap();
        let events = generators::gen_delete_workload(&g, g.edge_count() / 3, seed ^ 3).unwrap();
        for e in &events {
            let s = delete_edge(&mut g, &mut idx, e.u, e.v).unwrap();
            if !s.tainted {
                prop_assert!(idx.labels_equal(&idx.rebuild(&g)));
            } else {
                idx = idx.rebuild(&g);
            }
        }
    }

    #[test]
    fn vertex_insertion_matches_rebuild(seed in any::<u64>(), n in 10usize..80) {
        let mut g = generators::random_digraph(n, 2.0, seed);
        let mut idx = DblIndex::build(&g, cfg(8, 8)).unwrap();
        let picks = generators::gen_random_queries(n, 6, seed ^ 4);
        let outs: Vec<_> = picks.iter().map(|p| p.0).collect();
        let ins: Vec<_> = picks.iter().map(|p| p.1).collect();
        let (x, _) = insert_vertex(&mut g, &mut idx, &outs, &ins).unwrap();
        prop_assert_eq!(x.index(), n);
        prop_assert!(idx.labels_equal(&idx.rebuild(&g)));
        let again = idx.clone();
        for &t in &outs {
            insert_edge(&mut g, &mut idx, x, t).unwrap();
        }
        prop_assert_eq!(&idx, &again);
    }

    #[test]
    fn bidirectional_matches_plain(seed in any::<u64>(), n in 2usize..100, d in 0.2f64..4.0) {
        let g = generators::random_digraph(n, d, seed);
        for u in g.vertices() {
            let reach = bfs(&g, u, true);
            for w in g.vertices() {
                prop_assert_eq!(bidirectional_bfs(&g, u, w), reach[w.index()]);
            }
        }
    }

    #[test]
    fn graph_mutations_keep_adjacency_consistent(
        ops in proptest::collection::vec((any::<bool>(), 0u32..30, 0u32..30), 0..300)
    ) {
        let mut g = DynamicGraph::with_vertices(30);
        let mut shadow = std::collections::HashSet::new();
        for (add, a, b) in ops {
            let (a, b) = (VertexId(a), VertexId(b));
            if add {
                prop_assert_eq!(g.add_edge(a, b).unwrap(), shadow.insert((a, b)));
            } else {
                prop_assert_eq!(g.remove_edge(a, b).unwrap(), shadow.remove(&(a, b)));
            }
            prop_assert!(g.check_consistency().is_ok());
        }
        prop_assert_eq!(g.edge_count(), shadow.len());
    }

    #[test]
    fn edge_list_roundtrip(seed in any::<u64>(), n in 2usize..80, d in 0.5f64..5.0) {
        let g = generators::random_digraph(n, d, seed);
        let mut ids = IdMap::new();
        for i in 0..n as u64 {
            ids.intern(i * 3 + 5);
        }
        let mut text = Vec::new();
        dbl_core::io::write_edge_list(&g, &ids, &mut text).unwrap();
        let back = dbl_core::io::load_edge_list(text.as_slice()).unwrap();
        let original = |x: VertexId| ids.original(x);
        let loaded = |x: VertexId| back.ids.original(x);
        let mut a: Vec<_> = g.edges().map(|(x, y)| (original(x), original(y))).collect();
        let mut b: Vec<_> = back.graph.edges().map(|(x, y)| (loaded(x), loaded(y))).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }
}
