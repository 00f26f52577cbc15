//! Criterion benchmarks for the polar-ot kernels; see `benches/kernels.rs`.
//!
//! Run with `cargo bench -p polar-ot-bench`.
