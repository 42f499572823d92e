//! Criterion benchmarks for the `gelfand` crate; see `benches/`.
