//! Criterion benchmarks for the `markov-aloha` kernels live in `benches/`.
