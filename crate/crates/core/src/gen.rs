//! Deterministic worst-case data graphs with at most `m` edges and maximum
//! degree at most `λ`.

use crate::error::{Error, Result};
use crate::graph::UGraph;
use crate::oracle::brute_force_occurrences_undirected;
use crate::undirected::polymat_undir;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    CliqueUnion,
    Tripartite,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub graph: UGraph,
    pub kind: GenKind,
    /// The lower-bound guarantee's preconditions hold for this `(m, λ, k)`.
    pub certified: bool,
}

fn preconditions_base(m: u64, k: u64) -> bool {
    m >= (16 * k * k).max(64)
}

/// `⌊m / C(λ, 2)⌋` disjoint `λ`-cliques.
pub fn gen_clique_union(m: u64, lambda: u64, k: u64) -> Result<Generated> {
    if lambda < 2 {
        return Err(Error::DegenerateSpec(format!("lambda = {lambda} admits no clique edge")));
    }
    let per = lambda * (lambda - 1) / 2;
    let cliques = m / per;
    if cliques == 0 {
        return Err(Error::DegenerateSpec(format!("no {lambda}-clique fits in {m} edges")));
    }
    let n = (cliques * lambda) as usize;
    if n > u32::MAX as usize {
        return Err(Error::DegenerateSpec(format!("{n} vertices")));
    }
    let mut edges = Vec::with_capacity((cliques * per) as usize);
    for c in 0..cliques as u32 {
        let base = c * lambda as u32;
        for i in 0..lambda as u32 {
            for j in i + 1..lambda as u32 {
                edges.push((base + i, base + j));
            }
        }
    }
    let graph = UGraph::new(n, edges)?;
    let certified = preconditions_base(m, k) && k <= lambda && lambda * lambda < m;
    Ok(Generated { graph, kind: GenKind::CliqueUnion, certified })
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Smallest `s` with `s² ≥ m`.
fn ceil_sqrt(m: u64) -> u64 {
    let mut s = (m as f64).sqrt() as u64;
    while s * s < m {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= m {
        s -= 1;
    }
    s
}

/// Three vertex sets `V_A` (`⌈λ/4⌉`), `V_B` (`⌈m/(4λ)⌉`) and `V_C` (`⌈√m/4⌉`),
/// a clique on `V_B ∪ V_C`, and every edge between `V_A` and `V_B`.
pub fn gen_tripartite(m: u64, lambda: u64, k: u64) -> Result<Generated> {
    if lambda == 0 {
        return Err(Error::DegenerateSpec("lambda must be positive".into()));
    }
    let a = ceil_div(lambda, 4);
    let b = ceil_div(m, 4 * lambda);
    let c = ceil_div(ceil_sqrt(m), 4);
    let n = a + b + c;
    let edge_count = (b + c) * (b + c - 1) / 2 + a * b;
    if edge_count > m {
        return Err(Error::DegenerateSpec(format!("{edge_count} edges exceed m = {m}")));
    }
    let max_degree = (a + b + c - 1).max(b);
    if max_degree > lambda {
        return Err(Error::DegenerateSpec(format!("maximum degree {max_degree} exceeds lambda = {lambda}")));
    }
    let (a32, bc) = (a as u32, (b + c) as u32);
    let mut edges = Vec::with_capacity(edge_count as usize);
    // V_A = [0, a), V_B = [a, a + b), V_C = [a + b, n).
    for i in 0..bc {
        for j in i + 1..bc {
            edges.push((a32 + i, a32 + j));
        }
    }
    for x in 0..a32 {
        for y in 0..b as u32 {
            edges.push((x, a32 + y));
        }
    }
    let graph = UGraph::new(n as usize, edges)?;
    let certified = preconditions_base(m, k) && lambda * lambda >= m && 4 * k * lambda <= m;
    Ok(Generated { graph, kind: GenKind::Tripartite, certified })
}

#[derive(Clone, Debug)]
pub struct TightnessReport {
    pub occurrences: usize,
    /// `polymat_undir(m, λ, P) / (4k)^k`.
    pub lower_bound: f64,
    pub ratio: f64,
    pub applicable: bool,
    pub pass: bool,
}

/// Compares the brute-force occurrence count with the lower bound the
/// construction guarantees.
pub fn tightness_check(gen: &Generated, p: &UGraph, m: u64, lambda: u64) -> Result<TightnessReport> {
    let k = p.n as i32;
    let bound = polymat_undir(m, lambda, p)?.bound();
    let lower_bound = bound / (4.0 * k as f64).powi(k);
    let occurrences = brute_force_occurrences_undirected(&gen.graph, p)?.len();
    let ratio = occurrences as f64 / lower_bound;
    Ok(TightnessReport {
        occurrences,
        lower_bound,
        ratio,
        applicable: gen.certified,
        pass: occurrences as f64 >= lower_bound,
    })
}
