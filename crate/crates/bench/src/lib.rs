//! Criterion benchmarks for the quadrature, eigenvalue and growth-profile
//! stages live in `benches/`; run them with `cargo bench -p essbound-bench`.
