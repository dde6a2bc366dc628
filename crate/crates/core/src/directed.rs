//! Directed subgraph sampling through the companion join, and the acyclic
//! constraint subsets that make the join sampler applicable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{automorphism_count_directed, DiGraph, Occurrence};
use crate::lp::bounds::{modular_bound, polymat_acyclic, LogValue};
use crate::lp::simplex::{LinearProgram, Sense};
use crate::model::{validate_and_close, AttrSet, DegreeConstraint, DependencyGraph, JoinQuery, Relation};
use crate::race::RaceConfig;
use crate::rational::{log2_rational, Rational};
use crate::sampler::{Attempt, JoinSampler};

fn edge_set(u: u32, v: u32) -> AttrSet {
    AttrSet::from_ids([u as usize, v as usize])
}

fn m_constraint(u: u32, v: u32, m: u64) -> DegreeConstraint {
    DegreeConstraint::cardinality(edge_set(u, v), m)
}

fn lambda_constraint(u: u32, v: u32, lambda: u64) -> DegreeConstraint {
    DegreeConstraint::new(AttrSet::singleton(u as usize), edge_set(u, v), lambda).expect("u ⊊ {u, v}")
}

fn check_pattern(p: &DiGraph) -> Result<()> {
    if p.edges.is_empty() {
        return Err(Error::InvalidPattern("pattern has no edges".into()));
    }
    if p.n > crate::model::MAX_ATTRS {
        return Err(Error::InvalidPattern(format!("{} vertices", p.n)));
    }
    if !p.is_weakly_connected() {
        return Err(Error::InvalidPattern("pattern is not weakly connected".into()));
    }
    Ok(())
}

/// The full constraint set of a pattern: `(∅, {X,Y}, m)` and `({X}, {X,Y}, λ)`
/// for every edge `(X, Y)`, sorted and deduplicated.
pub fn pattern_constraints(p: &DiGraph, m: u64, lambda: u64) -> Vec<DegreeConstraint> {
    let set: BTreeSet<DegreeConstraint> =
        p.edges.iter().flat_map(|&(u, v)| [m_constraint(u, v, m), lambda_constraint(u, v, lambda)]).collect();
    set.into_iter().collect()
}

/// One binary relation per pattern edge, each holding every data edge, with
/// the pattern's constraints for `m = max(|E|, 1)`.
pub fn companion_join(g: &DiGraph, p: &DiGraph, lambda: u64) -> Result<(JoinQuery, Vec<DegreeConstraint>)> {
    check_pattern(p)?;
    if lambda == 0 {
        return Err(Error::InvalidPattern("lambda must be at least 1".into()));
    }
    if let Some(v) = (0..g.n as u32).find(|&v| g.out_neighbors(v).len() as u64 > lambda) {
        return Err(Error::LambdaViolation {
            vertex: g.labels.names[v as usize].clone(),
            degree: g.out_neighbors(v).len(),
            lambda,
        });
    }
    let rows: Vec<Vec<u32>> = g.edges.iter().map(|&(u, v)| vec![u, v]).collect();
    let relations = p
        .edges
        .iter()
        .map(|&(x, y)| {
            let name = format!("E_{}_{}", p.labels.names[x as usize], p.labels.names[y as usize]);
            Relation::new(name, vec![x as usize, y as usize], rows.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let q = JoinQuery::new(p.labels.names.clone(), relations, g.labels.names.clone())?;
    let m = (g.edges.len() as u64).max(1);
    Ok((q, pattern_constraints(p, m, lambda)))
}

/// A solution of the LP over edge variables `x` (cardinality) and `z` (degree):
/// minimize `Σ x·log m + z·log λ` such that every vertex `A` has
/// `Σ_{(X,A)} (x + z) + Σ_{(A,Y)} x ≥ 1`.
#[derive(Clone, Debug)]
pub struct LpPlusSolution {
    pub x: Vec<Rational>,
    pub z: Vec<Rational>,
    pub objective: Rational,
    /// `m` and `λ` are powers of two, so `objective` is exact.
    pub exact: bool,
}

fn lp_plus_objective(x: &[Rational], z: &[Rational], log_m: &Rational, log_l: &Rational) -> Rational {
    let sx: Rational = x.iter().cloned().sum();
    let sz: Rational = z.iter().cloned().sum();
    &(&sx * log_m) + &(&sz * log_l)
}

/// Whether `(x, z)` satisfies every vertex covering row.
pub fn lp_plus_feasible(p: &DiGraph, x: &[Rational], z: &[Rational]) -> bool {
    let mut cover = vec![Rational::zero(); p.n];
    for (e, &(u, v)) in p.edges.iter().enumerate() {
        if x[e].is_negative() || z[e].is_negative() {
            return false;
        }
        cover[u as usize] += &x[e];
        cover[v as usize] += &(&x[e] + &z[e]);
    }
    cover.iter().all(|c| *c >= Rational::one())
}

pub fn lp_plus(p: &DiGraph, m: u64, lambda: u64) -> Result<LpPlusSolution> {
    check_pattern(p)?;
    let (log_m, em) = log2_rational(m);
    let (log_l, el) = log2_rational(lambda);
    let ne = p.edges.len();
    let mut lp = LinearProgram::new(2 * ne, false);
    lp.objective = (0..2 * ne).map(|i| if i < ne { log_m.clone() } else { log_l.clone() }).collect();
    for a in 0..p.n as u32 {
        let mut row = Vec::new();
        for (e, &(u, v)) in p.edges.iter().enumerate() {
            if v == a {
                row.push((e, Rational::one()));
                row.push((ne + e, Rational::one()));
            } else if u == a {
                row.push((e, Rational::one()));
            }
        }
        lp.add_row(row, Sense::Ge, Rational::one());
    }
    let s = lp.solve()?;
    let z = s.x[ne..].to_vec();
    let mut x = s.x;
    x.truncate(ne);
    Ok(LpPlusSolution { x, z, objective: s.value, exact: em && el })
}

/// A directed cycle in the subgraph of edges with positive `z`, as edge
/// indices in cycle order, or `None` when that subgraph is acyclic.
pub fn z_support_cycle(p: &DiGraph, z: &[Rational]) -> Option<Vec<usize>> {
    // Colour-marking DFS over positive-z edges.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); p.n];
    for (e, &(u, _)) in p.edges.iter().enumerate() {
        if z[e].is_positive() {
            out[u as usize].push(e);
        }
    }
    let mut colour = vec![0u8; p.n];
    let mut via: Vec<Option<usize>> = vec![None; p.n];
    for s in 0..p.n {
        if colour[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        colour[s] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            if *i == out[u].len() {
                colour[u] = 2;
                stack.pop();
                continue;
            }
            let e = out[u][*i];
            *i += 1;
            let v = p.edges[e].1 as usize;
            match colour[v] {
                0 => {
                    colour[v] = 1;
                    via[v] = Some(e);
                    stack.push((v, 0));
                }
                1 => {
                    let mut cycle = vec![e];
                    let mut w = u;
                    while w != v {
                        let pe = via[w].expect("on the DFS path");
                        cycle.push(pe);
                        w = p.edges[pe].0 as usize;
                    }
                    cycle.reverse();
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

/// One cycle-elimination rewrite on `cycle` (edge indices in cycle order):
/// with `(A₁,A₂)` the edge of least `z` and `(A₂,A₃)` its successor, move
/// `z(A₁,A₂)` onto `x(A₂,A₃)` and subtract it from `z(A₂,A₃)`.
///
/// Every vertex keeps its coverage, and the objective changes by
/// `z(A₁,A₂)·(log m − 2 log λ)`.
pub fn lp_plus_rewrite(sol: &mut LpPlusSolution, cycle: &[usize], log_m: &Rational, log_l: &Rational) {
    let (pos, _) = cycle.iter().enumerate().min_by(|a, b| sol.z[*a.1].cmp(&sol.z[*b.1])).expect("non-empty cycle");
    let e1 = cycle[pos];
    let e2 = cycle[(pos + 1) % cycle.len()];
    let t = sol.z[e1].clone();
    sol.x[e2] += &t;
    sol.z[e2] -= &t;
    sol.z[e1] = Rational::zero();
    sol.objective = lp_plus_objective(&sol.x, &sol.z, log_m, log_l);
}

/// Applies rewrites until the positive-z edges form an acyclic subgraph.
/// Returns the number of rewrites.
pub fn lp_plus_acyclicize(p: &DiGraph, sol: &mut LpPlusSolution, m: u64, lambda: u64) -> usize {
    let (log_m, _) = log2_rational(m);
    let (log_l, _) = log2_rational(lambda);
    let mut rounds = 0;
    while let Some(cycle) = z_support_cycle(p, &sol.z) {
        lp_plus_rewrite(sol, &cycle, &log_m, &log_l);
        debug_assert!(lp_plus_feasible(p, &sol.x, &sol.z));
        rounds += 1;
    }
    rounds
}

/// A directed star inside the bipartite graph between `S` and `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub center: u32,
    /// Ascending petal ids.
    pub petals: Vec<u32>,
}

/// Vertex classification and the chosen structure for the `λ² ≤ m` route.
#[derive(Clone, Debug, Default)]
pub struct StarCoverReport {
    /// Strongly connected components, each ascending, in ascending order of
    /// their smallest vertex.
    pub sccs: Vec<Vec<u32>>,
    pub c1: usize,
    pub n1: usize,
    pub n2: usize,
    pub s: Vec<u32>,
    pub s1: Vec<u32>,
    pub s2: Vec<u32>,
    pub t: Vec<u32>,
    pub t1: Vec<u32>,
    pub t2: Vec<u32>,
    pub stars: Vec<Star>,
    /// `(root, main edge)` per non-trivial source SCC.
    pub roots: Vec<(u32, (u32, u32))>,
    /// Edges carrying a degree constraint in the subset.
    pub lambda_edges: Vec<(u32, u32)>,
    /// Exponents of `m` and `λ` in the closed form.
    pub m_exponent: usize,
    pub lambda_exponent: usize,
    /// Dual weights over the subset's constraints (same order).
    pub dual: Vec<Rational>,
}

impl StarCoverReport {
    pub fn closed_form(&self, m: u64, lambda: u64) -> LogValue {
        let (lm, em) = log2_rational(m);
        let (ll, el) = log2_rational(lambda);
        let v = &(&lm * &Rational::from_int(self.m_exponent as i64))
            + &(&ll * &Rational::from_int(self.lambda_exponent as i64));
        if em && el {
            LogValue::Exact(v)
        } else {
            LogValue::Float(v.to_f64())
        }
    }
}

fn sccs(p: &DiGraph) -> Vec<Vec<u32>> {
    let r = p.reachability();
    let mut assigned = vec![false; p.n];
    let mut out = Vec::new();
    for u in 0..p.n {
        if assigned[u] {
            continue;
        }
        let comp: Vec<u32> = (0..p.n).filter(|&v| r[u][v] && r[v][u]).map(|v| v as u32).collect();
        for &v in &comp {
            assigned[v as usize] = true;
        }
        out.push(comp);
    }
    out
}

/// Minimum directed star cover of the bipartite graph given by `edges`, found
/// by letting every vertex pick one incident edge and keeping the smallest
/// union that is a star forest.
fn min_star_cover(vertices: &[u32], edges: &[(u32, u32)]) -> Vec<Star> {
    let incident: Vec<Vec<usize>> =
        vertices.iter().map(|&v| (0..edges.len()).filter(|&e| edges[e].0 == v || edges[e].1 == v).collect()).collect();
    let mut choice = vec![0usize; vertices.len()];
    let mut best: Option<BTreeSet<usize>> = None;
    loop {
        let picked: BTreeSet<usize> = choice.iter().zip(&incident).map(|(&c, inc)| inc[c]).collect();
        if best.as_ref().is_none_or(|b| picked.len() < b.len()) && is_star_forest(&picked, edges) {
            best = Some(picked);
        }
        // Odometer over choices.
        let mut i = 0;
        loop {
            if i == choice.len() {
                let best = best.expect("every vertex has an incident edge");
                return stars_of(&best, edges);
            }
            choice[i] += 1;
            if choice[i] < incident[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn degrees(set: &BTreeSet<usize>, edges: &[(u32, u32)]) -> BTreeMap<u32, usize> {
    let mut d = BTreeMap::new();
    for &e in set {
        *d.entry(edges[e].0).or_insert(0) += 1;
        *d.entry(edges[e].1).or_insert(0) += 1;
    }
    d
}

fn is_star_forest(set: &BTreeSet<usize>, edges: &[(u32, u32)]) -> bool {
    let d = degrees(set, edges);
    set.iter().all(|&e| d[&edges[e].0] == 1 || d[&edges[e].1] == 1)
}

fn stars_of(set: &BTreeSet<usize>, edges: &[(u32, u32)]) -> Vec<Star> {
    let d = degrees(set, edges);
    let mut by_center: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &e in set {
        let (u, v) = edges[e];
        // A lone edge is centred at its source side; otherwise the vertex of
        // degree at least two is the centre.
        let (c, p) = if d[&v] >= 2 { (v, u) } else { (u, v) };
        by_center.entry(c).or_default().push(p);
    }
    by_center
        .into_iter()
        .map(|(center, mut petals)| {
            petals.sort_unstable();
            Star { center, petals }
        })
        .collect()
}

/// Breadth-first in-tree inside `comp` from `root`: `(parent, child)` edges.
fn bfs_tree(p: &DiGraph, comp: &[u32], root: u32) -> Vec<(u32, u32)> {
    let inside: BTreeSet<u32> = comp.iter().copied().collect();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut tree = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &v in p.out_neighbors(u) {
            if inside.contains(&v) && seen.insert(v) {
                tree.push((u, v));
                queue.push_back(v);
            }
        }
    }
    tree
}

/// The `λ² ≤ m` construction: classify SCCs, take a minimum star cover
/// between trivial sources `S` and their out-neighbours `T`, and keep degree
/// constraints only on a spanning structure whose dependency graph is acyclic.
pub fn star_cover_construction(p: &DiGraph, m: u64, lambda: u64) -> Result<(Vec<DegreeConstraint>, StarCoverReport)> {
    check_pattern(p)?;
    let comps = sccs(p);
    let mut comp_of = vec![0usize; p.n];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v as usize] = i;
        }
    }
    let is_source: Vec<bool> = comps
        .iter()
        .enumerate()
        .map(|(i, c)| c.iter().all(|&v| p.in_neighbors(v).iter().all(|&u| comp_of[u as usize] == i)))
        .collect();

    let mut rep = StarCoverReport { sccs: comps.clone(), ..Default::default() };
    rep.s = comps.iter().enumerate().filter(|(i, c)| is_source[*i] && c.len() == 1).map(|(_, c)| c[0]).collect();
    let in_s: BTreeSet<u32> = rep.s.iter().copied().collect();
    let t: BTreeSet<u32> = p.edges.iter().filter(|(u, _)| in_s.contains(u)).map(|&(_, v)| v).collect();
    rep.t = t.iter().copied().collect();

    let mut lambda_edges: Vec<(u32, u32)> = Vec::new();
    let mut dual_m: Vec<(u32, u32)> = Vec::new();

    // Star cover between S and T.
    if !rep.s.is_empty() {
        let bip: Vec<(u32, u32)> = p.edges.iter().copied().filter(|(u, v)| in_s.contains(u) && t.contains(v)).collect();
        let verts: Vec<u32> = rep.s.iter().chain(&rep.t).copied().collect();
        rep.stars = min_star_cover(&verts, &bip);
        for star in &rep.stars {
            if in_s.contains(&star.center) {
                rep.s1.push(star.center);
                let (main, rest) = star.petals.split_last().expect("star has a petal");
                lambda_edges.extend(rest.iter().map(|&y| (star.center, y)));
                dual_m.push((star.center, *main));
            } else {
                rep.t2.push(star.center);
                dual_m.extend(star.petals.iter().map(|&x| (x, star.center)));
            }
        }
        rep.s1.sort_unstable();
        rep.t2.sort_unstable();
        rep.s2 = rep.s.iter().copied().filter(|v| !rep.s1.contains(v)).collect();
        rep.t1 = rep.t.iter().copied().filter(|v| !rep.t2.contains(v)).collect();
    }

    for (i, comp) in comps.iter().enumerate() {
        if is_source[i] {
            if comp.len() == 1 {
                continue;
            }
            rep.c1 += 1;
            rep.n1 += comp.len();
            let root = comp[0];
            let tree = bfs_tree(p, comp, root);
            let main = *tree.iter().filter(|(u, _)| *u == root).min().expect("root has a tree child");
            rep.roots.push((root, main));
            dual_m.push(main);
            lambda_edges.extend(tree.into_iter().filter(|&e| e != main));
        } else {
            // Entry vertex: smallest id with an in-edge from another SCC.
            let external = |v: u32| p.in_neighbors(v).iter().copied().find(|&u| comp_of[u as usize] != i);
            let entry = *comp.iter().find(|&&v| external(v).is_some()).expect("non-source SCC has an entry");
            let mut parent: BTreeMap<u32, u32> = bfs_tree(p, comp, entry).into_iter().map(|(u, v)| (v, u)).collect();
            parent.insert(entry, external(entry).unwrap());
            for (&v, &u) in &parent {
                if !t.contains(&v) {
                    lambda_edges.push((u, v));
                }
            }
        }
    }
    rep.n2 = p.n - rep.n1 - rep.s.len() - rep.t.len();
    rep.m_exponent = rep.c1 + rep.s.len();
    rep.lambda_exponent = rep.n1 + rep.n2 + rep.t1.len() - 2 * rep.c1 - rep.s1.len();
    lambda_edges.sort_unstable();
    lambda_edges.dedup();

    let mut dc: BTreeSet<DegreeConstraint> = p.edges.iter().map(|&(u, v)| m_constraint(u, v, m)).collect();
    dc.extend(lambda_edges.iter().map(|&(u, v)| lambda_constraint(u, v, lambda)));
    let dc: Vec<DegreeConstraint> = dc.into_iter().collect();

    let weighted: BTreeSet<DegreeConstraint> = lambda_edges
        .iter()
        .map(|&(u, v)| lambda_constraint(u, v, lambda))
        .chain(dual_m.iter().map(|&(u, v)| m_constraint(u, v, m)))
        .collect();
    rep.dual = dc.iter().map(|c| if weighted.contains(c) { Rational::one() } else { Rational::zero() }).collect();
    rep.lambda_edges = lambda_edges;
    Ok((dc, rep))
}

/// Whether `delta` is feasible for the dual modular LP of `dc` over `k`
/// attributes, and its objective `Σ δ log₂ N`.
pub fn dual_modular_value(dc: &[DegreeConstraint], k: usize, delta: &[Rational]) -> (bool, Rational) {
    let mut cover = vec![Rational::zero(); k];
    let mut value = Rational::zero();
    let mut feasible = true;
    for (c, d) in dc.iter().zip(delta) {
        feasible &= !d.is_negative();
        for a in c.bounded().iter() {
            cover[a] += d;
        }
        value += &(d * &log2_rational(c.n).0);
    }
    feasible &= cover.iter().all(|c| *c >= Rational::one());
    (feasible, value)
}

#[derive(Clone, Debug)]
pub enum Route {
    /// The pattern itself is acyclic; every constraint is kept.
    AlreadyAcyclic,
    /// Cardinality constraints only (the AGM setting).
    CardinalityOnly,
    /// `λ² > m`: degree constraints kept on edges with positive `z`.
    LpPlus { solution: LpPlusSolution, rewrites: usize },
    /// `λ² ≤ m`: star cover construction.
    StarCover(Box<StarCoverReport>),
}

#[derive(Clone, Debug)]
pub struct AcyclicSubset {
    pub constraints: Vec<DegreeConstraint>,
    pub route: Route,
}

/// An acyclic subset of the pattern's constraints whose modular bound matches
/// the polymatroid bound of the full set up to a constant factor.
pub fn acyclic_subset(p: &DiGraph, m: u64, lambda: u64) -> Result<AcyclicSubset> {
    check_pattern(p)?;
    if lambda == 0 || m == 0 {
        return Err(Error::InvalidPattern("m and lambda must be positive".into()));
    }
    if p.is_acyclic() {
        return Ok(AcyclicSubset { constraints: pattern_constraints(p, m, lambda), route: Route::AlreadyAcyclic });
    }
    let subset = if (lambda as u128) * (lambda as u128) > m as u128 {
        let mut solution = lp_plus(p, m, lambda)?;
        let rewrites = lp_plus_acyclicize(p, &mut solution, m, lambda);
        let mut dc: BTreeSet<DegreeConstraint> = p.edges.iter().map(|&(u, v)| m_constraint(u, v, m)).collect();
        for (e, &(u, v)) in p.edges.iter().enumerate() {
            if solution.z[e].is_positive() {
                dc.insert(lambda_constraint(u, v, lambda));
            }
        }
        AcyclicSubset { constraints: dc.into_iter().collect(), route: Route::LpPlus { solution, rewrites } }
    } else {
        let (constraints, rep) = star_cover_construction(p, m, lambda)?;
        AcyclicSubset { constraints, route: Route::StarCover(Box::new(rep)) }
    };
    debug_assert!(DependencyGraph::new(&subset.constraints, p.n).is_acyclic());
    Ok(subset)
}

/// Only the `(∅, {X,Y}, m)` constraints; always acyclic.
pub fn cardinality_only(p: &DiGraph, m: u64) -> AcyclicSubset {
    let dc: BTreeSet<DegreeConstraint> = p.edges.iter().map(|&(u, v)| m_constraint(u, v, m)).collect();
    AcyclicSubset { constraints: dc.into_iter().collect(), route: Route::CardinalityOnly }
}

/// The directed polymatroid bound, as the modular bound of the acyclic subset.
pub fn polymat_dir(m: u64, lambda: u64, p: &DiGraph) -> Result<LogValue> {
    let s = acyclic_subset(p, m, lambda)?;
    Ok(polymat_acyclic(&s.constraints, p.n)?.log2)
}

pub fn automorphism_count(p: &DiGraph) -> usize {
    automorphism_count_directed(p)
}

/// Uniform sampling of occurrences of a directed pattern.
pub struct DirectedSampler {
    pub pattern: DiGraph,
    pub subset: AcyclicSubset,
    pub automorphisms: usize,
    pub sampler: JoinSampler,
}

impl DirectedSampler {
    pub fn new(g: &DiGraph, p: &DiGraph, lambda: u64) -> Result<Self> {
        let (q, _) = companion_join(g, p, lambda)?;
        let m = (g.edges.len() as u64).max(1);
        let subset = acyclic_subset(p, m, lambda)?;
        Self::with_constraints(q, p, subset)
    }

    /// Uses the given subset instead of deriving one (e.g. cardinality only).
    pub fn with_constraints(q: JoinQuery, p: &DiGraph, subset: AcyclicSubset) -> Result<Self> {
        let dc = validate_and_close(&q, &subset.constraints)?;
        let sampler = JoinSampler::from_constraints(&q, dc)?.require_distinct_values();
        Ok(DirectedSampler { pattern: p.clone(), subset, automorphisms: automorphism_count(p), sampler })
    }

    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Occurrence> {
        match self.sampler.attempt(rng) {
            Attempt::Success(map) => Some(Occurrence { map }),
            Attempt::Failed(_) => None,
        }
    }

    /// A uniformly random occurrence, or `None` when there is none.
    pub fn sample<R: Rng + Send>(&self, rng: &mut R, cfg: &RaceConfig) -> Option<Occurrence> {
        self.sampler.sample(rng, cfg).map(|map| Occurrence { map })
    }

    /// One representative map per occurrence, sorted by image edge set.
    pub fn occurrences(&self) -> Vec<Occurrence> {
        let mut by_key = BTreeMap::new();
        for map in self.sampler.enumerate_all() {
            let o = Occurrence { map };
            by_key.entry(o.key_directed(&self.pattern)).or_insert(o);
        }
        by_key.into_values().collect()
    }
}

/// Pattern-only variant of [`modular_bound`] on the subset, for reporting.
pub fn subset_bound(p: &DiGraph, m: u64, lambda: u64) -> Result<crate::lp::bounds::BoundReport> {
    modular_bound(&acyclic_subset(p, m, lambda)?.constraints, p.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::bounds::polymatroid_lp_full;

    fn cycle3() -> DiGraph {
        DiGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn exact(n: i64) -> LogValue {
        LogValue::Exact(Rational::from_int(n))
    }

    #[test]
    fn triangle_bounds_in_both_regimes() {
        assert_eq!(polymat_dir(1 << 10, 1 << 4, &cycle3()).unwrap(), exact(14));
        assert_eq!(polymat_dir(1 << 10, 1 << 8, &cycle3()).unwrap(), exact(15));
        let s = acyclic_subset(&cycle3(), 1 << 10, 1 << 8).unwrap();
        assert!(s.constraints.iter().all(DegreeConstraint::is_cardinality));
        let full = polymatroid_lp_full(&pattern_constraints(&cycle3(), 1 << 10, 1 << 8), 3).unwrap();
        assert_eq!(full, exact(15));
    }

    #[test]
    fn simple_patterns() {
        let edge = DiGraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(polymat_dir(1 << 10, 1 << 4, &edge).unwrap(), exact(10));
        let path = DiGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(polymat_dir(1 << 10, 1 << 4, &path).unwrap(), exact(14));
        let (dc, rep) = star_cover_construction(&path, 1 << 10, 1 << 4).unwrap();
        assert_eq!((rep.s.clone(), rep.t.clone(), rep.n2), (vec![0], vec![1], 1));
        assert_eq!(rep.closed_form(1 << 10, 1 << 4), exact(14));
        let (ok, v) = dual_modular_value(&dc, 3, &rep.dual);
        assert!(ok);
        assert_eq!(v, Rational::from_int(14));
    }

    #[test]
    fn triangle_star_cover_report() {
        let (dc, rep) = star_cover_construction(&cycle3(), 1 << 10, 1 << 4).unwrap();
        assert_eq!((rep.c1, rep.n1, rep.n2), (1, 3, 0));
        assert!(rep.s.is_empty() && rep.t.is_empty());
        assert!(DependencyGraph::new(&dc, 3).is_acyclic());
        let (ok, v) = dual_modular_value(&dc, 3, &rep.dual);
        assert!(ok);
        assert_eq!(v, Rational::from_int(14));
    }

    #[test]
    fn rewrite_preserves_cover_and_lowers_objective() {
        let p = cycle3();
        let (m, l) = (1u64 << 10, 1u64 << 8);
        let half = Rational::new(1, 2);
        let x = vec![Rational::zero(); 3];
        let z = vec![Rational::one(), Rational::new(3, 2), Rational::one()];
        let (lm, ll) = (log2_rational(m).0, log2_rational(l).0);
        let mut sol = LpPlusSolution { objective: lp_plus_objective(&x, &z, &lm, &ll), x, z, exact: true };
        assert!(lp_plus_feasible(&p, &sol.x, &sol.z));
        let before = sol.objective.clone();
        let n = lp_plus_acyclicize(&p, &mut sol, m, l);
        assert_eq!(n, 1);
        assert!(lp_plus_feasible(&p, &sol.x, &sol.z));
        assert!(sol.objective < before);
        // z(0,1) = 1 moved to x(1,2), z(1,2) = 3/2 − 1.
        assert_eq!(sol.x[1], Rational::one());
        assert_eq!(sol.z[1], half);
        assert!(z_support_cycle(&p, &sol.z).is_none());
    }

    #[test]
    fn companion_join_shapes() {
        let g = DiGraph::new(4, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 1)]).unwrap();
        let (q, dc) = companion_join(&g, &cycle3(), 2).unwrap();
        assert_eq!(q.relations.len(), 3);
        assert_eq!(dc.len(), 6);
        assert!(matches!(companion_join(&g, &cycle3(), 1), Err(Error::LambdaViolation { .. })));
        let s = DirectedSampler::new(&g, &cycle3(), 2).unwrap();
        // Directed triangles: 0→1→2→0 and 1→2→3→1.
        assert_eq!(s.occurrences().len(), 2);
    }
}
