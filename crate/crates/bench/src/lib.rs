//! Criterion benchmarks for the clustering pipeline; see `benches/`.
