//! Brute-force oracles, pattern catalogues and statistical checks.
//!
//! Nothing here calls into the join index, the enumerator or the samplers.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::{for_each_permutation, DiGraph, Occurrence, UGraph};
use crate::model::{AttrSet, DegreeConstraint, JoinQuery, Relation, Tuple, Value};

pub const MAX_CROSS_SPACE: u128 = 10_000_000;

/// The join by nested loops over per-attribute candidate domains, with a
/// membership check against every relation. Sorted, attribute-id order.
pub fn brute_force_join(q: &JoinQuery) -> Result<Vec<Tuple>> {
    let k = q.num_attrs();
    let mut domains: Vec<Option<BTreeSet<Value>>> = vec![None; k];
    for r in &q.relations {
        for (col, &a) in r.schema.iter().enumerate() {
            let vals: BTreeSet<Value> = r.rows.iter().map(|row| row[col]).collect();
            domains[a] = Some(match domains[a].take() {
                None => vals,
                Some(d) => d.intersection(&vals).copied().collect(),
            });
        }
    }
    let domains: Vec<Vec<Value>> = domains.into_iter().map(|d| d.unwrap_or_default().into_iter().collect()).collect();
    let space: u128 = domains.iter().map(|d| d.len() as u128).product();
    if space > MAX_CROSS_SPACE {
        return Err(Error::TooLarge(format!("cross space of {space} tuples")));
    }
    let members: Vec<HashSet<&[Value]>> =
        q.relations.iter().map(|r| r.rows.iter().map(Vec::as_slice).collect()).collect();
    let mut out = Vec::new();
    if domains.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    let mut idx = vec![0usize; k];
    loop {
        let t: Tuple = (0..k).map(|a| domains[a][idx[a]]).collect();
        let ok = q.relations.iter().zip(&members).all(|(r, m): (&Relation, _)| {
            let proj: Vec<Value> = r.schema.iter().map(|&a| t[a]).collect();
            m.contains(proj.as_slice())
        });
        if ok {
            out.push(t);
        }
        let mut a = k;
        loop {
            if a == 0 {
                out.sort_unstable();
                return Ok(out);
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < domains[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn backtrack(
    k: usize,
    n: usize,
    ok_edge: &dyn Fn(usize, usize, u32, u32) -> bool,
    map: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<u32>>,
) {
    let i = map.len();
    if i == k {
        out.push(map.clone());
        return;
    }
    for v in 0..n as u32 {
        if used[v as usize] || !(0..i).all(|j| ok_edge(j, i, map[j], v)) {
            continue;
        }
        used[v as usize] = true;
        map.push(v);
        backtrack(k, n, ok_edge, map, used, out);
        map.pop();
        used[v as usize] = false;
    }
}

fn guard(n: usize, k: usize) -> Result<()> {
    if (n as f64).powi(k as i32) > 1e12 {
        return Err(Error::TooLarge(format!("{n} vertices for a {k}-vertex pattern")));
    }
    Ok(())
}

/// Every occurrence of `p` in `g` (non-induced), one representative map per
/// image edge set, sorted by that edge set.
pub fn brute_force_occurrences_directed(g: &DiGraph, p: &DiGraph) -> Result<Vec<Occurrence>> {
    guard(g.n, p.n)?;
    let ok = |a: usize, b: usize, x: u32, y: u32| {
        (!p.has_edge(a as u32, b as u32) || g.has_edge(x, y)) && (!p.has_edge(b as u32, a as u32) || g.has_edge(y, x))
    };
    let mut maps = Vec::new();
    backtrack(p.n, g.n, &ok, &mut Vec::new(), &mut vec![false; g.n], &mut maps);
    let mut by_key = BTreeMap::new();
    for map in maps {
        let o = Occurrence { map };
        by_key.entry(o.key_directed(p)).or_insert(o);
    }
    Ok(by_key.into_values().collect())
}

pub fn brute_force_occurrences_undirected(g: &UGraph, p: &UGraph) -> Result<Vec<Occurrence>> {
    guard(g.n, p.n)?;
    let ok = |a: usize, b: usize, x: u32, y: u32| !p.has_edge(a as u32, b as u32) || g.has_edge(x, y);
    let mut maps = Vec::new();
    backtrack(p.n, g.n, &ok, &mut Vec::new(), &mut vec![false; g.n], &mut maps);
    let mut by_key = BTreeMap::new();
    for map in maps {
        let o = Occurrence { map };
        by_key.entry(o.key_undirected(p)).or_insert(o);
    }
    Ok(by_key.into_values().collect())
}

fn canonical_edges(edges: &[(u32, u32)], k: usize, directed: bool) -> Vec<(u32, u32)> {
    let mut best: Option<Vec<(u32, u32)>> = None;
    for_each_permutation(k, |perm| {
        let mut e: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u as usize] as u32, perm[v as usize] as u32);
                if directed {
                    (a, b)
                } else {
                    (a.min(b), a.max(b))
                }
            })
            .collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
    });
    best.unwrap_or_default()
}

/// All weakly connected simple digraphs on `k` vertices, up to isomorphism.
pub fn directed_patterns(k: usize) -> Vec<DiGraph> {
    let pairs: Vec<(u32, u32)> =
        (0..k as u32).flat_map(|u| (0..k as u32).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u64..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        let g = DiGraph::new(k, edges.iter().copied()).expect("valid edges");
        if !g.is_weakly_connected() {
            continue;
        }
        if seen.insert(canonical_edges(&edges, k, true)) {
            out.push(g);
        }
    }
    out
}

/// All connected simple graphs on `k` vertices, up to isomorphism.
pub fn undirected_patterns(k: usize) -> Vec<UGraph> {
    let pairs: Vec<(u32, u32)> = (0..k as u32).flat_map(|u| (u + 1..k as u32).map(move |v| (u, v))).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u64..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        let g = UGraph::new(k, edges.iter().copied()).expect("valid edges");
        if !g.is_connected() {
            continue;
        }
        if seen.insert(canonical_edges(&edges, k, false)) {
            out.push(g);
        }
    }
    out
}

/// A random constraint set over `k` attributes that is acyclic by
/// construction (every `x ∈ X` precedes every `y ∈ Y − X` in a hidden random
/// order), with power-of-two bounds and every attribute bounded.
pub fn random_acyclic_constraints<R: Rng>(rng: &mut R, k: usize) -> Vec<DegreeConstraint> {
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let mut set = BTreeSet::new();
    // Cardinality constraints covering every attribute.
    let mut uncovered: Vec<usize> = (0..k).collect();
    while let Some(a) = uncovered.pop() {
        
        let mut y = AttrSet::singleton(a);
        for _ in 0..rng.gen_range(0..3) {
            y.insert(rng.gen_range(0..k));
        }
        uncovered.retain(|&b| !y.contains(b));
        set.insert(DegreeConstraint::cardinality(y, 1 << rng.gen_range(2..12)));
    }
    for _ in 0..rng.gen_range(1..=2 * k) {
        let size = rng.gen_range(2..=k.min(4));
        let start = rng.gen_range(0..=k - size);
        let mut members: Vec<usize> = order[start..].to_vec();
        members.truncate(size);
        // `X` is an order prefix of `Y`.
        let split = rng.gen_range(1..size);
        let x = AttrSet::from_ids(members[..split].iter().copied());
        let y = AttrSet::from_ids(members.iter().copied());
        set.insert(DegreeConstraint::new(x, y, 1 << rng.gen_range(0..8)).expect("x ⊊ y"));
    }
    set.into_iter().collect()
}

/// A random query with binary and ternary relations over `k` attributes and
/// small value domains, every attribute covered.
pub fn random_query<R: Rng>(rng: &mut R, k: usize, domain: u32, rows: usize) -> JoinQuery {
    let attributes: Vec<String> = (0..k).map(|a| format!("A{a}")).collect();
    let values: Vec<String> = (0..domain).map(|v| format!("v{v}")).collect();
    let mut relations = Vec::new();
    let mut covered = AttrSet::EMPTY;
    let mut i = 0;
    while covered != AttrSet::full(k) || relations.len() < 2 {
        let width = rng.gen_range(2..=3.min(k));
        let mut schema: Vec<usize> = (0..k).collect();
        schema.shuffle(rng);
        schema.truncate(width);
        if let Some(a) = AttrSet::full(k).minus(covered).iter().next() {
            if !schema.contains(&a) {
                schema[0] = a;
            }
        }
        covered = covered.union(AttrSet::from_ids(schema.iter().copied()));
        let data: Vec<Tuple> =
            (0..rng.gen_range(1..=rows)).map(|_| (0..width).map(|_| rng.gen_range(0..domain)).collect()).collect();
        relations.push(Relation::new(format!("R{i}"), schema, data).expect("valid schema"));
        i += 1;
    }
    JoinQuery::new(attributes, relations, values).expect("covered query")
}

/// Counts per outcome over a fixed universe.
#[derive(Clone, Debug)]
pub struct FrequencyTable<K: Ord> {
    pub counts: BTreeMap<K, u64>,
    pub total: u64,
}

impl<K: Ord + Clone> FrequencyTable<K> {
    /// A table with every outcome of `universe` at zero.
    pub fn new(universe: impl IntoIterator<Item = K>) -> Self {
        FrequencyTable { counts: universe.into_iter().map(|k| (k, 0)).collect(), total: 0 }
    }

    /// Records one draw. Returns `false` (and records nothing) for an outcome
    /// outside the universe.
    pub fn record(&mut self, k: K) -> bool {
        match self.counts.get_mut(&k) {
            Some(c) => {
                *c += 1;
                self.total += 1;
                true
            }
            None => false,
        }
    }

    pub fn values(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UniformityReport {
    pub chi2: f64,
    pub p_value: f64,
    /// Largest `|count − N/u| / σ` over outcomes.
    pub max_sigma: f64,
    pub pass: bool,
}

pub const SIGMA_LIMIT: f64 = 6.0;
/// Chi-square tail probability below which uniformity is rejected.
pub const CHI2_ALPHA: f64 = 1e-6;

pub fn uniformity_test(counts: &[u64]) -> UniformityReport {
    let u = counts.len();
    assert!(u >= 2, "uniformity needs at least two outcomes");
    let n: u64 = counts.iter().sum();
    let p = 1.0 / u as f64;
    let expected = n as f64 * p;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    let mut chi2 = 0.0;
    let mut max_sigma: f64 = 0.0;
    for &c in counts {
        let d = c as f64 - expected;
        chi2 += d * d / expected;
        max_sigma = max_sigma.max(d.abs() / sigma);
    }
    let dist = ChiSquared::new((u - 1) as f64).expect("positive degrees of freedom");
    let p_value = 1.0 - dist.cdf(chi2);
    UniformityReport { chi2, p_value, max_sigma, pass: max_sigma <= SIGMA_LIMIT && p_value >= CHI2_ALPHA }
}

#[derive(Clone, Copy, Debug)]
pub struct RateReport {
    pub measured: f64,
    pub predicted: f64,
    pub sigmas: f64,
    pub pass: bool,
}

/// Binomial check of `successes / trials` against `predicted`.
pub fn success_rate_test(successes: u64, trials: u64, predicted: f64) -> RateReport {
    let measured = successes as f64 / trials as f64;
    let sd = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    let diff = (measured - predicted).abs();
    // A prediction of exactly 0 or 1 computed in floating point can be off by an ulp.
    let sigmas = if sd > 1e-12 {
        diff / sd
    } else if diff <= 1e-9 {
        0.0
    } else {
        f64::INFINITY
    };
    RateReport { measured, predicted, sigmas, pass: sigmas <= SIGMA_LIMIT }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QueryBuilder;

    #[test]
    fn triangle_join_on_k3() {
        let mut b = QueryBuilder::new();
        let e: Vec<Vec<String>> = [(1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1)]
            .iter()
            .map(|(x, y)| vec![x.to_string(), y.to_string()])
            .collect();
        b.relation("R", &["A", "B"], e.clone()).unwrap();
        b.relation("S", &["B", "C"], e.clone()).unwrap();
        b.relation("T", &["A", "C"], e).unwrap();
        assert_eq!(brute_force_join(&b.build().unwrap()).unwrap().len(), 6);
    }

    #[test]
    fn occurrence_counts() {
        let k4 = UGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let tri = UGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_occurrences_undirected(&k4, &tri).unwrap().len(), 4);
        let path = UGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_force_occurrences_undirected(&k4, &path).unwrap().len(), 12);
        let c3 = DiGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(brute_force_occurrences_directed(&c3, &c3).unwrap().len(), 1);
        let big = UGraph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(brute_force_occurrences_undirected(&tri, &big).unwrap().is_empty());
    }

    #[test]
    fn catalogue_sizes() {
        assert_eq!(directed_patterns(2).len(), 2);
        assert_eq!(directed_patterns(3).len(), 13);
        assert_eq!(undirected_patterns(4).len(), 6);
        assert_eq!(undirected_patterns(5).len(), 21);
    }

    #[test]
    fn uniformity_statistics() {
        assert_eq!(uniformity_test(&[1000, 1000, 1000]).max_sigma, 0.0);
        // 3000 draws over 3 outcomes: σ ≈ 25.8; +10σ on one outcome.
        let r = uniformity_test(&[1258, 871, 871]);
        assert!(r.max_sigma > 6.0 && !r.pass);
        assert!(success_rate_test(0, 100, 0.0).pass);
    }
}
