//! Random symplectics and states for tests, benchmarks and verification suites.

use rand::Rng;

use crate::gaussian::CovarianceMatrix;
use crate::symplectic::{Generator, SymplecticMatrix};

/// Product of two sweeps of random elementary generators. Squeezing
/// parameters are drawn from `[−strength, strength]`.
pub fn random_symplectic<R: Rng + ?Sized>(n: usize, strength: f64, rng: &mut R) -> SymplecticMatrix {
    let mut s = SymplecticMatrix::identity(n);
    let tau = std::f64::consts::TAU;
    let push = |g: Generator, s: &mut SymplecticMatrix| {
        *s = g.symplectic(n).expect("valid generator").compose(s);
    };
    for _ in 0..2 {
        for mode in 0..n {
            push(Generator::LocalRotation { mode, theta: rng.random_range(0.0..tau) }, &mut s);
            push(Generator::LocalSqueeze { mode, s: rng.random_range(-strength..=strength) }, &mut s);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let modes = (i, j);
                push(Generator::TwoModeRotationQq { modes, theta: rng.random_range(0.0..tau) }, &mut s);
                push(Generator::TwoModeSqueezeQq { modes, r: rng.random_range(-strength..=strength) }, &mut s);
                push(Generator::TwoModeRotationQp { modes, theta: rng.random_range(0.0..tau) }, &mut s);
                push(Generator::TwoModeSqueezeQp { modes, r: rng.random_range(-strength..=strength) }, &mut s);
            }
        }
    }
    s
}

/// Random two-mode local operation.
pub fn random_local<R: Rng + ?Sized>(strength: f64, rng: &mut R) -> SymplecticMatrix {
    let tau = std::f64::consts::TAU;
    Generator::GeneralLocal {
        angles: [0; 4].map(|_| rng.random_range(0.0..tau)),
        squeezes: [0; 2].map(|_| rng.random_range(-strength..=strength)),
    }
    .symplectic(2)
    .expect("two-mode generator")
}

/// `S · diag(γ, γ) · Sᵀ` with `γⱼ` uniform in `gamma_range` and `S` from
/// [`random_symplectic`].
pub fn random_physical_cm<R: Rng + ?Sized>(
    n: usize,
    gamma_range: (f64, f64),
    strength: f64,
    rng: &mut R,
) -> CovarianceMatrix {
    let gammas: Vec<f64> = (0..n).map(|_| rng.random_range(gamma_range.0..=gamma_range.1)).collect();
    let s = random_symplectic(n, strength, rng);
    CovarianceMatrix::thermal(&gammas).transformed(&s).expect("matching modes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_symplectic_is_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..4 {
            let s = random_symplectic(n, 0.8, &mut rng);
            assert!(s.residual() < 1e-11);
        }
    }
}
