//! Criterion benchmarks for the bound evaluators live in `benches/`.
