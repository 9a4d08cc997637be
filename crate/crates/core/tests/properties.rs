//! Randomized invariants of the tensor, circuit and quantum-tensor layers.

mod support;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tomography_matches_dense_contraction(seed in any::<u64>(), k in 1usize..=2, open in 0usize..3) {
        support::tomography_exact(seed, k, open)?;
    }

    #[test]
    fn open_link_gram_is_positive_semidefinite(seed in any::<u64>(), open in 0usize..3) {
        support::gram_psd(seed, open)?;
    }

    #[test]
    fn implicit_isometrization_yields_isometry(seed in any::<u64>(), leg in 0usize..3) {
        support::implicit_isometry(seed, leg)?;
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), n in 2usize..=4, layers in 1usize..=2) {
        support::gradient_fd(seed, n, layers)?;
    }

    #[test]
    fn contraction_counts_are_exact(seed in any::<u64>(), q in 0u32..6, m in 0u64..1000) {
        support::contraction_counts(seed, q, m)?;
    }

    #[test]
    fn dense_state_is_gauge_invariant(seed in any::<u64>(), moves in support::moves()) {
        support::gauge_invariance(seed, &moves)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn measurement_plan_equals_direct_expectation(seed in any::<u64>(), with_p in any::<bool>()) {
        support::plan_vs_direct(seed, with_p)?;
    }
}
