//! Criterion benchmarks for svtail-core live under `benches/`.
