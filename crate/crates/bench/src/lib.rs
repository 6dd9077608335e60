//! Criterion benchmarks for the flt5 hot loops; see `benches/`.
