//! Criterion benchmarks for `hyperdyn`; see `benches/`.
