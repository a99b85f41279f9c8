mod common;

use consistent_histories::histories::{
    coarse_grain, decoherence_matrix, decoherence_matrix_trace, history_states, CoarseGraining, DecoherenceMatrix,
};
use consistent_histories::linalg::{hermitian_deviation, purify, real_embed, C64};
use consistent_histories::mpv::{eps_for_delta, mpv_exact, EpsVariant};
use consistent_histories::consistency::{dhc, NullPolicy};
use proptest::prelude::*;

/// Plain double loop over every subset, no shared code with the library search.
fn brute_force_mpv(d: &DecoherenceMatrix) -> f64 {
    let n = d.n();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a != b && mask >> a & 1 == 1 && mask >> b & 1 == 1 {
                    s += d.get(a, b).re;
                }
            }
        }
        best = best.max(s.abs());
    }
    best
}

fn set_strategy() -> impl Strategy<Value = (u64, usize, bool)> {
    (any::<u64>(), 2usize..=4, any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoherence_is_hermitian_with_unit_sum((seed, d, mixed) in set_strategy()) {
        let set = common::random_chain_set(d, 3, 12, 1.0, mixed, &mut common::rng(seed));
        let dm = decoherence_matrix(&set);
        prop_assert!(hermitian_deviation(dm.entries()) <= 1e-14);
        prop_assert!((dm.total() - C64::new(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(dm.probabilities().iter().all(|&p| p >= -1e-15));
    }

    #[test]
    fn purified_states_reproduce_trace_form((seed, d, _) in set_strategy()) {
        let set = common::random_chain_set(d, 2, 9, 1.0, true, &mut common::rng(seed));
        let via_states = decoherence_matrix(&set);
        let via_trace = decoherence_matrix_trace(&set);
        let err = (via_states.entries() - via_trace.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12, "err {err}");
        let p = purify(&set.initial().density()).unwrap();
        prop_assert_eq!(history_states(&set)[0].len(), p.extended_dim());
    }

    #[test]
    fn real_embedding_preserves_real_parts((seed, d, mixed) in set_strategy()) {
        let set = common::random_chain_set(d, 2, 8, 1.0, mixed, &mut common::rng(seed));
        let states = history_states(&set);
        for a in &states {
            for b in &states {
                let direct = b.dotc(a).re;
                prop_assert!((real_embed(a).dot(&real_embed(b)) - direct).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn coarse_graining_sums_blocks((seed, d, mixed) in set_strategy(), split in 1usize..8) {
        let set = common::random_chain_set(d, 3, 12, 1.0, mixed, &mut common::rng(seed));
        let dm = decoherence_matrix(&set);
        let n = dm.n();
        let cut = split.min(n - 1);
        let cells = vec![(0..cut).collect::<Vec<_>>(), (cut..n).collect()];
        let coarse = coarse_grain(&dm, &CoarseGraining::new(cells.clone(), n).unwrap()).unwrap();
        for (i, ci) in cells.iter().enumerate() {
            for (j, cj) in cells.iter().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for &a in ci {
                    for &b in cj {
                        s += dm.get(a, b);
                    }
                }
                prop_assert!((coarse.get(i, j) - s).norm() <= 1e-12);
            }
        }
        prop_assert!((coarse.total() - dm.total()).norm() <= 1e-12);
    }

    #[test]
    fn mpv_matches_brute_force((seed, d, mixed) in set_strategy(), rotation in 0.0f64..1.5) {
        let set = common::random_chain_set(d, 3, 10, rotation, mixed, &mut common::rng(seed));
        let dm = decoherence_matrix(&set);
        let result = mpv_exact(&dm).unwrap();
        let oracle = brute_force_mpv(&dm);
        prop_assert!(result.value >= 0.0);
        prop_assert!((result.value - oracle).abs() <= 1e-12, "{} vs {oracle}", result.value);
        prop_assert!((dm.subset_violation(&result.maximizer).abs() - result.value).abs() <= 1e-12);
    }

    #[test]
    fn dhc_bounds_violation(seed in any::<u64>(), delta in 0.05f64..0.9) {
        let mut rng = common::rng(seed);
        let set = common::random_chain_set(3, 2, 9, 0.05, false, &mut rng);
        let dm = decoherence_matrix(&set);
        let eps = eps_for_delta(delta, set.state_dim(), EpsVariant::EpsChoice).unwrap().epsilon;
        if dhc(&dm, eps, NullPolicy::Skip).unwrap().pass {
            prop_assert!(mpv_exact(&dm).unwrap().value <= delta * (1.0 + delta));
        }
    }
}
