//! Criterion benchmarks for the frame-sum kernels live in `benches/`.
