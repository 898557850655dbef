//! Criterion benchmarks for `mhrev-core`; see `benches/`.
