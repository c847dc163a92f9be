//! Criterion benchmarks for tracing, measures and the radius search live in `benches/`.
