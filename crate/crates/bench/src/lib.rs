//! Benchmark fixtures.

use gree_core::gree::family_cm;
use gree_core::sample::random_physical_cm;
use gree_core::{BorderType, CovarianceMatrix, SymmetricParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reproducible random physical CMs with `n` modes.
pub fn random_states(n: usize, count: usize, seed: u64) -> Vec<CovarianceMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_physical_cm(n, (0.55, 3.0), 0.5, &mut rng)).collect()
}

/// Entangled two-mode states of each family.
pub fn entangled_states() -> Vec<(&'static str, CovarianceMatrix)> {
    vec![
        ("type_i", family_cm(BorderType::I, 1.2, 1.5, 0.6, 1.1).expect("physical")),
        ("type_ii", family_cm(BorderType::II, 1.2, 1.5, 0.3, 4.0).expect("physical")),
        ("tmst", SymmetricParams::tmst(1.5, 0.9).expect("physical").cm()),
    ]
}
