use std::collections::BTreeSet;

use degsample::directed::DirectedSampler;
use degsample::graph::{DiGraph, UGraph};
use degsample::oracle::{
    brute_force_occurrences_directed, brute_force_occurrences_undirected, directed_patterns, undirected_patterns,
};
use degsample::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn digraph(rng: &mut ChaCha8Rng, n: u32) -> DiGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        let mut targets: Vec<u32> = (0..n).filter(|&v| v != u).collect();
        targets.shuffle(rng);
        targets.truncate(rng.gen_range(1..=3));
        edges.extend(targets.into_iter().map(|v| (u, v)));
    }
    DiGraph::new(n as usize, edges).unwrap()
}

fn ugraph(rng: &mut ChaCha8Rng, n: u32) -> UGraph {
    let edges: BTreeSet<(u32, u32)> = (0..2 * n)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .filter(|(u, v)| u != v)
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    UGraph::new(n as usize, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn directed_occurrences_match_brute_force(seed in any::<u64>(), e in 0usize..1000, extra in 0u64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = digraph(&mut rng, 7);
        let ps = directed_patterns(3);
        let p = &ps[e % ps.len()];
        let s = DirectedSampler::new(&g, p, g.max_out_degree() as u64 + extra).unwrap();
        let want: BTreeSet<_> =
            brute_force_occurrences_directed(&g, p).unwrap().iter().map(|o| o.key_directed(p)).collect();
        let got: BTreeSet<_> = s.occurrences().iter().map(|o| o.key_directed(p)).collect();
        prop_assert_eq!(&got, &want);
        for _ in 0..300 {
            if let Some(o) = s.attempt(&mut rng) {
                prop_assert!(o.is_valid_directed(&g, p));
            }
        }
    }

    #[test]
    fn undirected_occurrences_match_brute_force(seed in any::<u64>(), e in 0usize..1000, extra in 0u64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ugraph(&mut rng, 8);
        let ps = undirected_patterns(4);
        let p = &ps[e % ps.len()];
        let s = degsample::undirected::UndirectedSampler::new(&g, p, g.max_degree() as u64 + extra).unwrap();
        let want: BTreeSet<_> =
            brute_force_occurrences_undirected(&g, p).unwrap().iter().map(|o| o.key_undirected(p)).collect();
        let got: BTreeSet<_> = s.occurrences().iter().map(|o| o.key_undirected(p)).collect();
        prop_assert_eq!(&got, &want);
        for _ in 0..300 {
            if let Some(o) = s.attempt(&mut rng) {
                prop_assert!(o.is_valid_undirected(&g, p));
            }
        }
    }
}

#[test]
fn degree_above_lambda_is_rejected() {
    let g = UGraph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let p = UGraph::new(3, [(0, 1), (1, 2)]).unwrap();
    let err = degsample::undirected::UndirectedSampler::new(&g, &p, 2).err().unwrap();
    assert!(matches!(err, Error::LambdaViolation { degree: 3, lambda: 2, .. }));
}
