use gree_core::descent::{descend, StopRule};
use gree_core::gree::{border_candidate_value, border_cm, gree, BorderParams, BorderShape, GreeOptions, ThirdKind};
use gree_core::sample::{random_local, random_physical_cm, random_symplectic};
use gree_core::{cm_to_em, em_to_cm, is_separable, relative_entropy, CovarianceMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shape() -> impl Strategy<Value = BorderShape> {
    prop_oneof![
        (0.05..1.2_f64).prop_map(|r| BorderShape::I { r }),
        (0.05..1.5_f64).prop_map(|theta| BorderShape::II { theta }),
        any::<bool>().prop_map(|b| BorderShape::III {
            kind: if b { ThirdKind::First } else { ThirdKind::Second }
        }),
        Just(BorderShape::IV),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cm_em_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let alpha = random_physical_cm(n, (0.55, 3.0), 0.6, &mut rng(seed));
        let back = em_to_cm(&cm_to_em(&alpha).unwrap()).unwrap();
        prop_assert!((back.matrix() - alpha.matrix()).abs().max() < 1e-8);
    }

    #[test]
    fn relative_entropy_is_nonnegative_and_symplectic_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_physical_cm(n, (0.55, 2.5), 0.5, &mut r);
        let b = random_physical_cm(n, (0.6, 2.5), 0.5, &mut r);
        let v = relative_entropy(&a, &b).unwrap().value;
        prop_assert!(v >= 0.0);
        prop_assert!(relative_entropy(&a, &a).unwrap().value.abs() < 1e-9);
        let s = random_symplectic(n, 0.4, &mut r);
        let w = relative_entropy(&a.transformed(&s).unwrap(), &b.transformed(&s).unwrap()).unwrap().value;
        prop_assert!((v - w).abs() < 1e-8 * (1.0 + v));
    }

    #[test]
    fn border_states_sit_on_the_border(ga in 0.55..3.0_f64, gb in 0.55..3.0_f64, shape in shape()) {
        if let Ok(p) = BorderParams::new(ga, gb, shape) {
            let cm = border_cm(&p).unwrap();
            let sep = is_separable(&cm).unwrap();
            prop_assert!(sep.border_residual.abs() < 1e-8, "{:?}: {}", p, sep.border_residual);
            prop_assert!(sep.ppt_min_eigenvalue > 0.5 - 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gree_is_a_lower_bound_and_locally_invariant(seed in any::<u64>(), ga in 0.6..2.0_f64, gb in 0.6..2.0_f64, shape in shape()) {
        let mut r = rng(seed);
        let alpha = random_physical_cm(2, (0.55, 1.2), 0.7, &mut r);
        let opts = GreeOptions { starts: 16, ..Default::default() };
        let g = gree(&alpha, &opts).unwrap();
        if let Ok(p) = BorderParams::new(ga, gb, shape) {
            if !g.diagnostics.separable_input {
                prop_assert!(border_candidate_value(&alpha, &p).unwrap() >= g.value - 1e-6);
            }
        }
        let moved = alpha.transformed(&random_local(0.5, &mut r)).unwrap();
        prop_assert!((gree(&moved, &opts).unwrap().value - g.value).abs() < 1e-6);
    }

    #[test]
    fn descent_objective_never_rises(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alpha = random_physical_cm(2, (0.6, 1.5), 0.5, &mut r);
        let sigma = cm_to_em(&random_physical_cm(2, (0.7, 1.6), 0.5, &mut r)).unwrap();
        let out = descend(&alpha, &sigma, StopRule::AtRho).unwrap();
        let objs: Vec<f64> = out.state.step_log.iter().map(|s| s.objective).collect();
        prop_assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(out.state.objective <= 1e-8);
    }
}

#[test]
fn thermal_product_gree_is_zero() {
    let g = gree(&CovarianceMatrix::thermal(&[1.0, 2.0]), &GreeOptions::default()).unwrap();
    assert_eq!(g.value, 0.0);
}

#[test]
fn descent_from_the_optimal_border_state_recovers_gree() {
    let mut r = rng(11);
    let opts = GreeOptions { starts: 16, ..Default::default() };
    let mut seen = 0;
    while seen < 20 {
        let alpha = random_physical_cm(2, (0.55, 1.2), 0.7, &mut r);
        let g = gree(&alpha, &opts).unwrap();
        if g.diagnostics.separable_input {
            continue;
        }
        seen += 1;
        let out = descend(&alpha, g.best_em.as_ref().unwrap(), StopRule::AtBorder).unwrap();
        let b = out.best_crossing().expect("starts on the border");
        assert!(b.value >= g.value - 1e-6, "{} < {}", b.value, g.value);
        assert!(b.value - g.value <= 1e-3, "{} vs {}", b.value, g.value);
    }
}
