//! Criterion benchmarks for the channel, rate and optimizer hot paths; see `benches/`.
