//! Benchmarks for the observable integrators; see `benches/`.
