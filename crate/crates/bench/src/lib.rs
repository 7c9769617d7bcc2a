//! Shared fixtures for the benchmarks.

use dbl_core::workload::generators;
use dbl_core::{DblIndex, DynamicGraph, IndexConfig};

/// A seeded random digraph with `n` vertices and average degree `d`, plus its index.
pub fn fixture(n: usize, d: f64, seed: u64, config: IndexConfig) -> (DynamicGraph, DblIndex) {
    let g = generators::random_digraph(n, d, seed);
    let idx = DblIndex::build(&g, config.clamped(n)).expect("valid config");
    (g, idx)
}

pub fn config(k: usize, k_prime: usize) -> IndexConfig {
    IndexConfig { k, k_prime, ..IndexConfig::default() }
}
