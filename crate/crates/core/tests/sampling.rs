use std::collections::BTreeSet;

use degsample::oracle::{brute_force_join, random_query};
use degsample::race::RaceConfig;
use degsample::sampler::{Attempt, JoinSampler, PassStats};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_nested_loops(seed in any::<u64>(), k in 2usize..=4) {
        let q = random_query(&mut ChaCha8Rng::seed_from_u64(seed), k, 4, 10);
        let mut got = JoinSampler::new(&q, &[]).unwrap().enumerate_all();
        got.sort_unstable();
        prop_assert_eq!(got, brute_force_join(&q).unwrap());
    }

    #[test]
    fn attempts_return_join_results_with_certified_pass_probabilities(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&mut rng, k, 4, 10);
        let all: BTreeSet<_> = brute_force_join(&q).unwrap().into_iter().collect();
        let s = JoinSampler::new(&q, &[]).unwrap();
        let mut stats = PassStats::default();
        for _ in 0..500 {
            if let Attempt::Success(t) = s.attempt_checked(&mut rng, &mut stats) {
                prop_assert!(all.contains(&t));
            }
        }
        prop_assert_eq!(stats.certificate_failures, 0);
    }

    #[test]
    fn permutation_lists_each_result_once(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&mut rng, k, 4, 8);
        let s = JoinSampler::new(&q, &[]).unwrap();
        let mut perm = s.random_permutation(&mut rng, &RaceConfig::default());
        perm.sort_unstable();
        prop_assert_eq!(perm, brute_force_join(&q).unwrap());
    }

    #[test]
    fn sampling_is_empty_iff_the_join_is(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&mut rng, k, 4, 6);
        let all = brute_force_join(&q).unwrap();
        let s = JoinSampler::new(&q, &[]).unwrap();
        match s.sample(&mut rng, &RaceConfig::default()) {
            None => prop_assert!(all.is_empty()),
            Some(t) => prop_assert!(all.contains(&t)),
        }
    }
}

#[test]
fn estimate_is_close_to_the_output_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = random_query(&mut rng, 3, 3, 5);
    let out = brute_force_join(&q).unwrap().len() as f64;
    let e = JoinSampler::new(&q, &[]).unwrap().estimate_out(&mut rng, 0.1, 0.99, &RaceConfig::default());
    if e.exact {
        assert_eq!(e.value, out);
    } else {
        assert!((e.value - out).abs() <= 0.1 * out.max(1.0) * 3.0);
    }
}
