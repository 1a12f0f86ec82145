//! Inputs shared by the benchmarks.

use qeigen::rng::{random_hermitian_with_spectrum, seeded_rng};
use qeigen::HermitianOperator;

/// Dense Hermitian operator with spectrum evenly spread over `[0.1, 0.9]`.
pub fn spread_operator(n: usize, seed: u64) -> HermitianOperator {
    let spectrum: Vec<f64> = (0..n).map(|i| 0.1 + 0.8 * i as f64 / (n - 1) as f64).collect();
    HermitianOperator::from_dense(random_hermitian_with_spectrum(&spectrum, &mut seeded_rng(seed)))
        .expect("generated operator is Hermitian")
}
