use degsample::directed::{acyclic_subset, dual_modular_value, pattern_constraints, polymat_dir};
use degsample::lp::bounds::{agm_bound, modular_bound, polymat_acyclic, polymatroid_lp_full};
use degsample::model::DependencyGraph;
use degsample::oracle::{
    brute_force_join, directed_patterns, random_acyclic_constraints, random_query, undirected_patterns,
};
use degsample::sampler::JoinSampler;
use degsample::undirected::polymat_undir;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modular_bound_equals_polymatroid_bound_when_acyclic(seed in any::<u64>(), k in 2usize..=5) {
        let dc = random_acyclic_constraints(&mut ChaCha8Rng::seed_from_u64(seed), k);
        prop_assert!(DependencyGraph::new(&dc, k).is_acyclic());
        let report = modular_bound(&dc, k).unwrap();
        prop_assert_eq!(&report.log2, &polymatroid_lp_full(&dc, k).unwrap());
        // Strong duality on the returned weights.
        let (feasible, value) = dual_modular_value(&dc, k, &report.dual);
        prop_assert!(feasible);
        prop_assert_eq!(Some(&value), report.log2.exact());
    }

    #[test]
    fn output_size_is_below_every_bound(seed in any::<u64>(), k in 2usize..=4) {
        let q = random_query(&mut ChaCha8Rng::seed_from_u64(seed), k, 4, 10);
        let out = brute_force_join(&q).unwrap().len() as f64;
        let s = JoinSampler::new(&q, &[]).unwrap();
        prop_assert!(out <= s.bound.log2.bound() * (1.0 + 1e-9));
        prop_assert!(out <= agm_bound(&q).unwrap().log2.bound() * (1.0 + 1e-9));
    }

    #[test]
    fn undirected_closed_form_matches_directed_bound(e in 0usize..1000, log_m in 2u32..16, log_l in 0u32..16) {
        let ps = undirected_patterns(4);
        let p = &ps[e % ps.len()];
        let (m, l) = (1u64 << log_m, 1u64 << log_l);
        prop_assert_eq!(polymat_undir(m, l, p).unwrap(), polymat_dir(m, l, &p.to_directed()).unwrap());
    }

    #[test]
    fn acyclic_subset_never_undercuts_the_full_bound(e in 0usize..1000, log_m in 2u32..14, log_l in 0u32..14) {
        let ps = directed_patterns(3);
        let p = &ps[e % ps.len()];
        let (m, l) = (1u64 << log_m, 1u64 << log_l);
        let sub = acyclic_subset(p, m, l).unwrap();
        prop_assert!(DependencyGraph::new(&sub.constraints, p.n).is_acyclic());
        let subset = polymat_acyclic(&sub.constraints, p.n).unwrap().log2.to_f64();
        let full = polymatroid_lp_full(&pattern_constraints(p, m, l), p.n).unwrap().to_f64();
        prop_assert!(subset >= full - 1e-9, "{subset} < {full}");
    }
}
