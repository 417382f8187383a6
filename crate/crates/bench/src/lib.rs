//! Criterion benchmarks for jigsaw-core live in `benches/`.
