use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use dbl_bench::{config, fixture};
use dbl_core::workload::generators;
use dbl_core::{delete_edge, insert_edge, query_batch, DblIndex, QueryOptions};

const N: usize = 20_000;

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    for d in [2.0, 4.0, 8.0] {
        let (g, _) = fixture(N, d, 1, config(8, 8));
        group.throughput(Throughput::Elements(g.edge_count() as u64));
        group.bench_with_input(BenchmarkId::new("k64", d), &g, |b, g| {
            b.iter(|| DblIndex::build(g, config(64, 64)).unwrap())
        });
    }
    group.finish();
}

fn queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("query");
    let (g, idx) = fixture(N, 4.0, 2, config(64, 64));
    let pairs = generators::gen_random_queries(N, 10_000, 3);
    group.throughput(Throughput::Elements(pairs.len() as u64));
    let variants = [
        ("full", QueryOptions::default()),
        ("dl_only", QueryOptions { use_bl: false, ..QueryOptions::default() }),
    ];
    for (name, opts) in variants {
        group.bench_function(name, |b| {
            b.iter(|| query_batch(&g, &idx, black_box(&pairs), 1, opts).unwrap())
        });
    }
    group.finish();
}

fn updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("update");
    group.sample_size(20);
    let (g, idx) = fixture(N, 4.0, 4, config(64, 64));
    let inserts = generators::gen_insert_workload(&g, 100, 5).unwrap();
    group.throughput(Throughput::Elements(inserts.len() as u64));
    group.bench_function("insert_100", |b| {
        b.iter_batched(
            || (g.clone(), idx.clone()),
            |(mut g, mut idx)| {
                for e in &inserts {
                    insert_edge(&mut g, &mut idx, e.u, e.v).unwrap();
                }
            },
            BatchSize::LargeInput,
        )
    });

    let dag = generators::random_dag(N, 4.0, 6);
    let dag_idx = DblIndex::build(&dag, config(64, 64)).unwrap();
    let deletes = generators::gen_delete_workload(&dag, 100, 7).unwrap();
    group.bench_function("delete_100_dag", |b| {
        b.iter_batched(
            || (dag.clone(), dag_idx.clone()),
            |(mut g, mut idx)| {
                for e in &deletes {
                    delete_edge(&mut g, &mut idx, e.u, e.v).unwrap();
                }
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, build, queries, updates);
criterion_main!(benches);
