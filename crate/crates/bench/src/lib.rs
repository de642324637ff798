//! Criterion benchmarks for the noregret kernels live in `benches/`.
