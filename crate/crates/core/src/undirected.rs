//! Undirected subgraph sampling: the fractional edge-cover decomposition, the
//! closed-form bound, the spanning-tree sampler for small `λ` and the
//! cycle/star composite sampler for large `λ`.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::directed::{cardinality_only, companion_join, DirectedSampler};
use crate::enumerate::{to_attribute_order, Enumerator, JoinTries};
use crate::error::{Error, Result};
use crate::graph::{automorphisms_undirected, Occurrence, UGraph};
use crate::lp::bounds::{construct_h_star, LogValue, SetFunction};
use crate::lp::simplex::{LinearProgram, Sense};
use crate::model::JoinQuery;
use crate::race::{race, RaceConfig, RaceOutcome};
use crate::rational::{log2_rational, Rational};

fn check_pattern(p: &UGraph) -> Result<()> {
    if p.edges.is_empty() {
        return Err(Error::InvalidPattern("pattern has no edges".into()));
    }
    if p.n > 8 {
        return Err(Error::InvalidPattern(format!("{} vertices (at most 8)", p.n)));
    }
    if !p.is_connected() {
        return Err(Error::InvalidPattern("pattern is not connected".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UStar {
    pub center: u32,
    pub petals: Vec<u32>,
}

impl UStar {
    pub fn vertices(&self) -> Vec<u32> {
        std::iter::once(self.center).chain(self.petals.iter().copied()).collect()
    }
}

/// Vertex-disjoint odd cycles and stars covering the pattern, with
/// `Σ ρ*(component) = ρ*(P)`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Vertex sequences in cycle order.
    pub cycles: Vec<Vec<u32>>,
    pub stars: Vec<UStar>,
    /// Optimal fractional edge-cover weight per pattern edge.
    pub weights: Vec<Rational>,
    /// Fractional edge-cover number.
    pub rho: Rational,
}

impl Decomposition {
    pub fn alpha(&self) -> usize {
        self.cycles.len()
    }

    pub fn beta(&self) -> usize {
        self.stars.len()
    }

    pub fn k_cycle(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }

    pub fn k_star(&self) -> usize {
        self.stars.iter().map(|s| s.petals.len() + 1).sum()
    }

    /// `Σ ρ*` over components.
    pub fn component_rho(&self) -> Rational {
        let c = Rational::new(self.k_cycle() as i64, 2);
        let s = Rational::from_int(self.stars.iter().map(|s| s.petals.len() as i64).sum());
        &c + &s
    }
}

/// Solves the edge-cover LP exactly and reads the decomposition off the
/// optimal vertex, whose weights are half-integral: weight-1 edges form
/// stars and weight-½ edges form vertex-disjoint odd cycles.
pub fn edge_cover_decomposition(p: &UGraph) -> Result<Decomposition> {
    check_pattern(p)?;
    let ne = p.edges.len();
    let mut lp = LinearProgram::new(ne, false);
    lp.objective = vec![Rational::one(); ne];
    for v in 0..p.n as u32 {
        let row = (0..ne).filter(|&e| p.edges[e].0 == v || p.edges[e].1 == v).map(|e| (e, Rational::one())).collect();
        lp.add_row(row, Sense::Ge, Rational::one());
    }
    let sol = lp.solve()?;
    let half = Rational::new(1, 2);
    let one = Rational::one();
    let mut full_adj: Vec<Vec<u32>> = vec![Vec::new(); p.n];
    let mut half_adj: Vec<Vec<u32>> = vec![Vec::new(); p.n];
    for (e, &(u, v)) in p.edges.iter().enumerate() {
        let w = &sol.x[e];
        if *w == one {
            full_adj[u as usize].push(v);
            full_adj[v as usize].push(u);
        } else if *w == half {
            half_adj[u as usize].push(v);
            half_adj[v as usize].push(u);
        } else {
            assert!(w.is_zero(), "edge-cover optimum is not half-integral: {w}");
        }
    }

    let mut cycles = Vec::new();
    let mut seen = vec![false; p.n];
    for s in 0..p.n {
        if seen[s] || half_adj[s].is_empty() {
            continue;
        }
        let mut cycle = vec![s as u32];
        seen[s] = true;
        let (mut prev, mut cur) = (s as u32, half_adj[s][0]);
        while cur as usize != s {
            assert_eq!(half_adj[cur as usize].len(), 2, "half-weight edges do not form cycles");
            assert!(!seen[cur as usize], "half-weight edges do not form disjoint cycles");
            seen[cur as usize] = true;
            cycle.push(cur);
            let next = *half_adj[cur as usize].iter().find(|&&w| w != prev).expect("cycle continues");
            prev = cur;
            cur = next;
        }
        assert!(cycle.len() % 2 == 1 && cycle.len() >= 3, "half-weight cycle of even length");
        assert!(cycle.iter().all(|&v| full_adj[v as usize].is_empty()), "cycle touches a star");
        cycles.push(cycle);
    }

    let mut stars: Vec<UStar> = Vec::new();
    for (e, &(u, v)) in p.edges.iter().enumerate() {
        if sol.x[e] != one {
            continue;
        }
        let (du, dv) = (full_adj[u as usize].len(), full_adj[v as usize].len());
        assert!(du == 1 || dv == 1, "weight-1 edges do not form stars");
        let (c, leaf) = if du >= 2 {
            (u, v)
        } else if dv >= 2 {
            (v, u)
        } else {
            (u.min(v), u.max(v))
        };
        match stars.iter_mut().find(|s| s.center == c) {
            Some(s) => s.petals.push(leaf),
            None => stars.push(UStar { center: c, petals: vec![leaf] }),
        }
    }
    for s in &mut stars {
        s.petals.sort_unstable();
    }
    stars.sort_by_key(|s| s.center);
    let covered: usize =
        cycles.iter().map(Vec::len).sum::<usize>() + stars.iter().map(|s| s.petals.len() + 1).sum::<usize>();
    assert_eq!(covered, p.n, "decomposition does not cover every vertex exactly once");
    let d = Decomposition { cycles, stars, weights: sol.x, rho: sol.value };
    assert_eq!(d.component_rho(), d.rho, "component edge-cover numbers do not add up");
    Ok(d)
}

/// No degree exceeds the edge count, so a `λ` above `m` says nothing more
/// than `λ = m`.
fn effective_lambda(m: u64, lambda: u64) -> u64 {
    lambda.min(m)
}

/// The closed-form undirected polymatroid bound in log₂ space:
/// `m·λ^{k−2}` when `λ² ≤ m`, otherwise `m^{k_cycle/2 + β}·λ^{k_star − 2β}`,
/// with `λ` capped at `m`.
pub fn polymat_undir(m: u64, lambda: u64, p: &UGraph) -> Result<LogValue> {
    check_pattern(p)?;
    let lambda = effective_lambda(m, lambda);
    let (lm, em) = log2_rational(m);
    let (ll, el) = log2_rational(lambda);
    let (em_exp, el_exp) = undir_exponents(m, lambda, p)?;
    let v = &(&lm * &em_exp) + &(&ll * &el_exp);
    Ok(if em && el { LogValue::Exact(v) } else { LogValue::Float(v.to_f64()) })
}

/// Exponents of `m` and `λ` in the closed form.
pub fn undir_exponents(m: u64, lambda: u64, p: &UGraph) -> Result<(Rational, Rational)> {
    let lambda = effective_lambda(m, lambda);
    let k = p.n as i64;
    if (lambda as u128) * (lambda as u128) <= m as u128 {
        return Ok((Rational::one(), Rational::from_int(k - 2)));
    }
    let d = edge_cover_decomposition(p)?;
    let beta = d.beta() as i64;
    Ok((
        &Rational::new(d.k_cycle() as i64, 2) + &Rational::from_int(beta),
        Rational::from_int(d.k_star() as i64 - 2 * beta),
    ))
}

/// The explicit set function attaining the closed form.
pub fn h_star(m: u64, lambda: u64, p: &UGraph) -> Result<SetFunction> {
    check_pattern(p)?;
    let lambda = effective_lambda(m, lambda);
    let (lm, _) = log2_rational(m);
    let (ll, _) = log2_rational(lambda);
    let small = (lambda as u128) * (lambda as u128) <= m as u128;
    let d = edge_cover_decomposition(p)?;
    let ids = |v: &[u32]| v.iter().map(|&x| x as usize).collect::<Vec<_>>();
    let cycles: Vec<Vec<usize>> = d.cycles.iter().map(|c| ids(c)).collect();
    let stars: Vec<Vec<usize>> = d.stars.iter().map(|s| ids(&s.vertices())).collect();
    Ok(construct_h_star(p.n, &lm, &ll, small, &cycles, &stars))
}

/// A half-integral optimal vertex packing and the induced vertex partition.
#[derive(Clone, Debug)]
pub struct VertexPack {
    pub nu: Vec<Rational>,
    /// `ν = 1`.
    pub ua: Vec<u32>,
    /// `ν = 0`.
    pub ub: Vec<u32>,
    /// `ν = ½`.
    pub uc: Vec<u32>,
    /// One-edge stars with both endpoints at `½`.
    pub s: usize,
}

pub fn vertex_pack_half_integral(p: &UGraph, d: &Decomposition) -> Result<VertexPack> {
    let mut lp = LinearProgram::new(p.n, true);
    lp.objective = vec![Rational::one(); p.n];
    for &(u, v) in &p.edges {
        lp.add_row(vec![(u as usize, Rational::one()), (v as usize, Rational::one())], Sense::Le, Rational::one());
    }
    let sol = lp.solve()?;
    let half = Rational::new(1, 2);
    let nu: Vec<Rational> = sol
        .x
        .iter()
        .map(|x| match x.cmp(&half) {
            std::cmp::Ordering::Equal => half.clone(),
            _ if x.is_zero() || *x == Rational::one() => x.clone(),
            std::cmp::Ordering::Less => Rational::zero(),
            std::cmp::Ordering::Greater => Rational::one(),
        })
        .collect();
    let pick = |val: &Rational| (0..p.n as u32).filter(|&v| nu[v as usize] == *val).collect::<Vec<_>>();
    let (ua, ub, uc) = (pick(&Rational::one()), pick(&Rational::zero()), pick(&half));
    let s = d
        .stars
        .iter()
        .filter(|st| st.petals.len() == 1 && nu[st.center as usize] == half && nu[st.petals[0] as usize] == half)
        .count();
    Ok(VertexPack { nu, ua, ub, uc, s })
}

impl VertexPack {
    /// Feasibility, the size identities against `d`, and the two no-edge
    /// conditions (inside `U_A`, between `U_A` and `U_C`).
    pub fn check(&self, p: &UGraph, d: &Decomposition) -> bool {
        let feasible = p.edges.iter().all(|&(u, v)| &self.nu[u as usize] + &self.nu[v as usize] <= Rational::one());
        let sizes = self.ua.len() + d.beta() + self.s == d.k_star()
            && self.ub.len() + self.s == d.beta()
            && self.uc.len() == d.k_cycle() + 2 * self.s;
        let in_a = |v: u32| self.ua.contains(&v);
        let in_c = |v: u32| self.uc.contains(&v);
        let structure =
            p.edges.iter().all(|&(u, v)| !(in_a(u) && in_a(v)) && !(in_a(u) && in_c(v)) && !(in_c(u) && in_a(v)));
        let total: Rational = self.nu.iter().cloned().sum();
        feasible && sizes && structure && total == d.rho
    }
}

pub fn partition_uabc(p: &UGraph) -> Result<VertexPack> {
    let d = edge_cover_decomposition(p)?;
    vertex_pack_half_integral(p, &d)
}

/// Breadth-first spanning tree of a pattern: the visiting order and each
/// non-root vertex's parent.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub order: Vec<u32>,
    pub parent: Vec<u32>,
}

impl SpanningTree {
    pub fn bfs(p: &UGraph) -> Self {
        let mut order = vec![0u32];
        let mut parent = vec![u32::MAX; p.n];
        let mut seen = vec![false; p.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            for &v in p.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    parent[v as usize] = u;
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        SpanningTree { order, parent }
    }
}

/// One attempt of the spanning-tree sampler: map the first tree edge onto a
/// random data edge in a random orientation, then extend every later vertex
/// to a neighbour of its parent's image, drawn as one of `λ` slots. Accepts
/// iff the map is injective and every pattern edge lands on a data edge.
/// Each specific map is produced with probability `1 / (2|E| λ^{k−2})`.
pub fn spanning_tree_attempt<R: Rng + ?Sized>(
    g: &UGraph,
    p: &UGraph,
    tree: &SpanningTree,
    lambda: u64,
    rng: &mut R,
) -> Option<Occurrence> {
    if g.edges.is_empty() {
        return None;
    }
    let mut map = vec![u32::MAX; p.n];
    let (a, b) = g.edges[rng.gen_range(0..g.edges.len())];
    let (a, b) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
    map[tree.order[0] as usize] = a;
    map[tree.order[1] as usize] = b;
    for &v in &tree.order[2..] {
        let from = map[tree.parent[v as usize] as usize];
        let r = rng.gen_range(0..lambda);
        let nbrs = g.neighbors(from);
        if r as usize >= nbrs.len() {
            return None;
        }
        map[v as usize] = nbrs[r as usize];
    }
    let o = Occurrence { map };
    o.is_valid_undirected(g, p).then_some(o)
}

/// A uniformly random isomorphism bijection onto the image of `map`:
/// `map ∘ σ` for a uniform automorphism `σ` of the component.
pub fn random_isomorphism_bijection<R: Rng + ?Sized>(
    automorphisms: &[Vec<usize>],
    map: &[u32],
    rng: &mut R,
) -> Vec<u32> {
    let sigma = automorphisms.choose(rng).expect("identity is an automorphism");
    sigma.iter().map(|&s| map[s]).collect()
}

fn has_result(s: &DirectedSampler) -> bool {
    let mut e = s.sampler.enumerator();
    while e.results().is_empty() && !e.step(1024) {}
    !e.results().is_empty()
}

enum ComponentSampler {
    Cycle(Box<DirectedSampler>),
    Star { tree: SpanningTree },
}

struct Component {
    /// Pattern vertex ids; local vertex `i` is `vertices[i]`.
    vertices: Vec<u32>,
    graph: UGraph,
    automorphisms: Vec<Vec<usize>>,
    sampler: ComponentSampler,
}

impl Component {
    fn draw<R: Rng + ?Sized>(&self, g: &UGraph, lambda: u64, rng: &mut R) -> Vec<u32> {
        let map = loop {
            let got = match &self.sampler {
                ComponentSampler::Cycle(s) => s.attempt(rng),
                ComponentSampler::Star { tree } => spanning_tree_attempt(g, &self.graph, tree, lambda, rng),
            };
            if let Some(o) = got {
                break o.map;
            }
        };
        random_isomorphism_bijection(&self.automorphisms, &map, rng)
    }
}

/// Which algorithm an [`UndirectedSampler`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `λ² ≤ |E|`: spanning-tree sampling.
    SpanningTree,
    /// `λ² > |E|`: cycle and star components sampled separately.
    Composite,
}

/// Uniform sampling of occurrences of an undirected pattern.
pub struct UndirectedSampler {
    pub graph: UGraph,
    pub pattern: UGraph,
    pub lambda: u64,
    pub regime: Regime,
    pub decomposition: Option<Decomposition>,
    tree: SpanningTree,
    components: Vec<Component>,
    /// Some component has no occurrence at all.
    component_empty: bool,
    join: JoinQuery,
    order: Vec<usize>,
}

impl UndirectedSampler {
    pub fn new(g: &UGraph, p: &UGraph, lambda: u64) -> Result<Self> {
        check_pattern(p)?;
        if let Some(v) = (0..g.n as u32).find(|&v| g.degree(v) as u64 > lambda) {
            return Err(Error::LambdaViolation {
                vertex: g.labels.names[v as usize].clone(),
                degree: g.degree(v),
                lambda,
            });
        }
        let m = (g.edges.len() as u64).max(1);
        let regime =
            if (lambda as u128) * (lambda as u128) <= m as u128 { Regime::SpanningTree } else { Regime::Composite };
        let gd = g.to_directed();
        let m_directed = (gd.edges.len() as u64).max(1);
        let pd = p.to_directed();
        let (join, _) = companion_join(&gd, &pd, lambda)?;
        let order: Vec<usize> = SpanningTree::bfs(p).order.iter().map(|&v| v as usize).collect();

        let mut s = UndirectedSampler {
            graph: g.clone(),
            pattern: p.clone(),
            lambda,
            regime,
            decomposition: None,
            tree: SpanningTree::bfs(p),
            components: Vec::new(),
            component_empty: false,
            join,
            order,
        };
        if regime == Regime::Composite {
            let d = edge_cover_decomposition(p)?;
            for c in &d.cycles {
                let l = c.len() as u32;
                let graph = UGraph::new(c.len(), (0..l).map(|i| (i, (i + 1) % l)))?;
                let cd = graph.to_directed();
                let (q, _) = companion_join(&gd, &cd, lambda)?;
                let sampler = DirectedSampler::with_constraints(q, &cd, cardinality_only(&cd, m_directed))?;
                if !has_result(&sampler) {
                    s.component_empty = true;
                }
                let automorphisms = automorphisms_undirected(&graph);
                s.components.push(Component {
                    vertices: c.clone(),
                    graph,
                    automorphisms,
                    sampler: ComponentSampler::Cycle(Box::new(sampler)),
                });
            }
            for st in &d.stars {
                let t = st.petals.len() as u32;
                let graph = UGraph::new(st.petals.len() + 1, (1..=t).map(|i| (0, i)))?;
                if g.max_degree() < st.petals.len() {
                    s.component_empty = true;
                }
                let automorphisms = automorphisms_undirected(&graph);
                let tree = SpanningTree::bfs(&graph);
                s.components.push(Component {
                    vertices: st.vertices(),
                    graph,
                    automorphisms,
                    sampler: ComponentSampler::Star { tree },
                });
            }
            s.decomposition = Some(d);
        }
        Ok(s)
    }

    /// One attempt of the regime's sampler. In the composite regime the
    /// attempt draws a uniform occurrence with a uniform bijection for every
    /// component, then keeps the combined map iff it is an occurrence of `P`.
    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Occurrence> {
        match self.regime {
            Regime::SpanningTree => spanning_tree_attempt(&self.graph, &self.pattern, &self.tree, self.lambda, rng),
            Regime::Composite => {
                if self.component_empty {
                    return None;
                }
                let mut map = vec![u32::MAX; self.pattern.n];
                for c in &self.components {
                    let local = c.draw(&self.graph, self.lambda, rng);
                    for (i, &v) in c.vertices.iter().enumerate() {
                        map[v as usize] = local[i];
                    }
                }
                let o = Occurrence { map };
                o.is_valid_undirected(&self.graph, &self.pattern).then_some(o)
            }
        }
    }

    fn tries(&self) -> JoinTries {
        JoinTries::build(&self.join, &self.order).expect("order is a permutation")
    }

    /// A uniformly random occurrence, or `None` when there is none.
    pub fn sample<R: Rng + Send>(&self, rng: &mut R, cfg: &RaceConfig) -> Option<Occurrence> {
        let tries = self.tries();
        let mut e = tries.enumerator(true);
        if self.component_empty {
            return None;
        }
        let (outcome, _) = race(|| self.attempt(rng), &mut e, cfg);
        match outcome {
            RaceOutcome::Sampled(o) => Some(o),
            RaceOutcome::Enumerated => {
                let all = e.results();
                if all.is_empty() {
                    None
                } else {
                    let t = &all[rng.gen_range(0..all.len())];
                    Some(Occurrence { map: to_attribute_order(&self.order, t) })
                }
            }
        }
    }

    /// One representative map per occurrence, sorted by image edge set.
    pub fn occurrences(&self) -> Vec<Occurrence> {
        let tries = self.tries();
        let mut e = tries.enumerator(true);
        while !e.step(usize::MAX) {}
        let mut by_key = BTreeMap::new();
        for t in e.into_results() {
            let o = Occurrence { map: to_attribute_order(&self.order, &t) };
            by_key.entry(o.key_undirected(&self.pattern)).or_insert(o);
        }
        by_key.into_values().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directed::polymat_dir;
    use crate::lp::bounds::satisfies_undirected_lp;
    use rand::SeedableRng;

    fn tri() -> UGraph {
        UGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn decompositions() {
        let d = edge_cover_decomposition(&tri()).unwrap();
        assert_eq!((d.alpha(), d.beta(), d.k_cycle()), (1, 0, 3));
        let path = UGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let d = edge_cover_decomposition(&path).unwrap();
        assert_eq!(d.stars, vec![UStar { center: 1, petals: vec![0, 2] }]);
        let pendant = UGraph::new(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let d = edge_cover_decomposition(&pendant).unwrap();
        assert_eq!(d.rho, Rational::from_int(2));
        assert_eq!(d.beta(), 2);
        assert_eq!(d.k_star(), 4);
    }

    #[test]
    fn closed_form_matches_directed_route() {
        let t = tri();
        let exact = |n: i64| LogValue::Exact(Rational::from_int(n));
        assert_eq!(polymat_undir(1 << 10, 1 << 4, &t).unwrap(), exact(14));
        assert_eq!(polymat_undir(1 << 10, 1 << 8, &t).unwrap(), exact(15));
        assert_eq!(polymat_dir(1 << 10, 1 << 8, &t.to_directed()).unwrap(), exact(15));
        let edge = UGraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(polymat_undir(1 << 10, 1 << 8, &edge).unwrap(), exact(10));
        assert_eq!(polymat_undir(1 << 10, 1 << 2, &edge).unwrap(), exact(10));
    }

    #[test]
    fn h_star_is_feasible_and_tight() {
        let t = tri();
        let edges: Vec<(usize, usize)> = t.edges.iter().map(|&(u, v)| (u as usize, v as usize)).collect();
        for (m, l) in [(1u64 << 10, 1u64 << 4), (1 << 10, 1 << 8)] {
            let h = h_star(m, l, &t).unwrap();
            let (lm, ll) = (log2_rational(m).0, log2_rational(l).0);
            assert!(satisfies_undirected_lp(&h, &edges, &lm, &ll));
            let full = crate::model::AttrSet::full(3);
            assert_eq!(LogValue::Exact(h.get(full).clone()), polymat_undir(m, l, &t).unwrap());
        }
    }

    #[test]
    fn vertex_pack_partitions() {
        let vp = partition_uabc(&tri()).unwrap();
        assert_eq!((vp.ua.len(), vp.ub.len(), vp.uc.len(), vp.s), (0, 0, 3, 0));
        let star = UGraph::new(3, [(0, 1), (0, 2)]).unwrap();
        let vp = partition_uabc(&star).unwrap();
        assert_eq!((vp.ua.clone(), vp.ub.clone()), (vec![1, 2], vec![0]));
        let d = edge_cover_decomposition(&star).unwrap();
        assert!(vp.check(&star, &d));
    }

    #[test]
    fn triangles_in_k4() {
        let k4 = UGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for lambda in [3u64, 4] {
            let s = UndirectedSampler::new(&k4, &tri(), lambda).unwrap();
            assert_eq!(s.occurrences().len(), 4);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(lambda);
            let o = s.sample(&mut rng, &RaceConfig::default()).unwrap();
            assert!(o.is_valid_undirected(&k4, &tri()));
        }
    }
}
