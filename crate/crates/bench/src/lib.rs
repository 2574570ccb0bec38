//! Criterion benchmarks for loglattice live in `benches/`.
