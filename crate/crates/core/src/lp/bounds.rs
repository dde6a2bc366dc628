//! Output-size bounds: modular, polymatroid (full LP), AGM, and set-function
//! feasibility checks.

use std::fmt;

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::lp::simplex::{LinearProgram, Sense};
use crate::model::{AttrSet, DegreeConstraint, DependencyGraph, JoinQuery};
use crate::rational::{log2_rational, Rational};

/// A bound in log₂ space.
#[derive(Clone, Debug, PartialEq)]
pub enum LogValue {
    /// Every input was a power of two, so the optimum is an exact rational.
    Exact(Rational),
    /// Inputs had irrational logarithms; solved exactly on their nearest
    /// `f64` values and reported as a float.
    Float(f64),
    /// The bound is 0 (some relation is empty).
    NegInfinity,
}

impl LogValue {
    fn from_solution(value: Rational, exact: bool) -> Self {
        if exact {
            LogValue::Exact(value)
        } else {
            LogValue::Float(value.to_f64())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LogValue::Exact(r) => r.to_f64(),
            LogValue::Float(x) => *x,
            LogValue::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            LogValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    /// The bound itself, `2^log2`.
    pub fn bound(&self) -> f64 {
        self.to_f64().exp2()
    }

    /// Exact equality when both sides are exact, otherwise `|a − b| ≤ tol`.
    pub fn approx_eq(&self, other: &LogValue, tol: f64) -> bool {
        match (self, other) {
            (LogValue::Exact(a), LogValue::Exact(b)) => a == b,
            (LogValue::NegInfinity, LogValue::NegInfinity) => true,
            (LogValue::NegInfinity, _) | (_, LogValue::NegInfinity) => false,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            LogValue::Exact(r) => {
                let (n, d) = r.numer_denom();
                json!({ "exact": [n.to_string(), d.to_string()] })
            }
            LogValue::Float(x) => json!({ "float": x }),
            LogValue::NegInfinity => json!({ "float": "-inf" }),
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Exact(r) => write!(f, "{r}"),
            LogValue::Float(x) => write!(f, "{x:.9}"),
            LogValue::NegInfinity => write!(f, "-inf"),
        }
    }
}

/// Optimum of a bound LP together with its primal and dual solutions.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub log2: LogValue,
    /// Modular bound: `ν` per attribute. AGM: edge-cover weight per relation.
    pub primal: Vec<Rational>,
    /// Modular bound: `δ` per constraint. AGM: vertex-packing weight per attribute.
    pub dual: Vec<Rational>,
}

fn rationals_json(v: &[Rational]) -> Json {
    Json::Array(v.iter().map(|r| json!(r.to_string())).collect())
}

impl BoundReport {
    pub fn to_json(&self) -> Json {
        json!({
            "log2": self.log2.to_json(),
            "primal": rationals_json(&self.primal),
            "dual": rationals_json(&self.dual),
        })
    }
}

/// Logs of all constraint bounds and whether they are all exact.
fn logs(dc: &[DegreeConstraint]) -> (Vec<Rational>, bool) {
    let mut exact = true;
    let v = dc
        .iter()
        .map(|c| {
            let (l, e) = log2_rational(c.n);
            exact &= e;
            l
        })
        .collect();
    (v, exact)
}

fn check_universe(dc: &[DegreeConstraint], k: usize) -> Result<()> {
    let universe = AttrSet::full(k);
    for c in dc {
        if !c.y.is_subset(universe) {
            return Err(Error::Schema(format!("constraint {:?} outside {k} attributes", c.y)));
        }
    }
    Ok(())
}

/// `max Σ_A ν_A` subject to `Σ_{A ∈ Y−X} ν_A ≤ log₂ N` per constraint, `ν ≥ 0`.
/// The dual `δ` is the optimal weighting used by the sampler.
pub fn modular_bound(dc: &[DegreeConstraint], k: usize) -> Result<BoundReport> {
    check_universe(dc, k)?;
    let (log_n, exact) = logs(dc);
    let mut lp = LinearProgram::new(k, true);
    lp.objective = vec![Rational::one(); k];
    for (c, l) in dc.iter().zip(log_n) {
        lp.add_row(c.bounded().iter().map(|a| (a, Rational::one())).collect(), Sense::Le, l);
    }
    let s = lp.solve()?;
    Ok(BoundReport { log2: LogValue::from_solution(s.value, exact), primal: s.x, dual: s.duals })
}

/// The polymatroid bound for an acyclic constraint set, which equals the
/// modular bound.
pub fn polymat_acyclic(dc: &[DegreeConstraint], k: usize) -> Result<BoundReport> {
    check_universe(dc, k)?;
    DependencyGraph::new(dc, k).topological_order()?;
    modular_bound(dc, k)
}

pub const MAX_FULL_LP_ATTRS: usize = 6;

/// The polymatroid bound by the full LP over set functions `h: 2^V → ℝ`.
/// Works for cyclic constraint sets; limited to `k ≤ 6`.
pub fn polymatroid_lp_full(dc: &[DegreeConstraint], k: usize) -> Result<LogValue> {
    if k > MAX_FULL_LP_ATTRS {
        return Err(Error::TooLarge(format!("{k} attributes (full LP handles at most {MAX_FULL_LP_ATTRS})")));
    }
    check_universe(dc, k)?;
    let (log_n, exact) = logs(dc);
    let full = (1usize << k) - 1;
    // Variable S−1 holds h(S) for non-empty S; h(∅) = 0 is implicit.
    let var = |s: usize| s - 1;
    let mut lp = LinearProgram::new(full, true);
    lp.objective[var(full)] = Rational::one();
    let one = Rational::one;
    let neg = || -Rational::one();
    for (c, l) in dc.iter().zip(log_n) {
        let mut row = vec![(var(c.y.0 as usize), one())];
        if !c.x.is_empty() {
            row.push((var(c.x.0 as usize), neg()));
        }
        lp.add_row(row, Sense::Le, l);
    }
    // h(K ∪ i ∪ j) + h(K) − h(K ∪ i) − h(K ∪ j) ≤ 0.
    for i in 0..k {
        for j in i + 1..k {
            for kk in 0..=full {
                if kk >> i & 1 == 1 || kk >> j & 1 == 1 {
                    continue;
                }
                let (ki, kj, kij) = (kk | 1 << i, kk | 1 << j, kk | 1 << i | 1 << j);
                let mut row = vec![(var(kij), one()), (var(ki), neg()), (var(kj), neg())];
                if kk != 0 {
                    row.push((var(kk), one()));
                }
                lp.add_row(row, Sense::Le, Rational::zero());
            }
        }
    }
    // h(V − i) ≤ h(V).
    for i in 0..k {
        let rest = full & !(1 << i);
        if rest != 0 {
            lp.add_row(vec![(var(rest), one()), (var(full), neg())], Sense::Le, Rational::zero());
        }
    }
    let s = lp.solve()?;
    Ok(LogValue::from_solution(s.value, exact))
}

/// `min Σ_F w_F log₂|R_F|` subject to every attribute being covered with total
/// weight at least 1. The dual is the fractional vertex packing.
pub fn agm_bound(q: &JoinQuery) -> Result<BoundReport> {
    let k = q.num_attrs();
    let covered = q.relations.iter().fold(AttrSet::EMPTY, |s, r| s.union(r.attrs()));
    if let Some(a) = AttrSet::full(k).minus(covered).iter().next() {
        return Err(Error::UncoveredAttribute(q.attributes[a].clone()));
    }
    if q.relations.iter().any(|r| r.is_empty()) {
        return Ok(BoundReport { log2: LogValue::NegInfinity, primal: Vec::new(), dual: Vec::new() });
    }
    let mut exact = true;
    let mut lp = LinearProgram::new(q.relations.len(), false);
    for (f, r) in q.relations.iter().enumerate() {
        let (l, e) = log2_rational(r.len() as u64);
        exact &= e;
        lp.objective[f] = l;
    }
    for a in 0..k {
        let row = (0..q.relations.len())
            .filter(|&f| q.relations[f].attrs().contains(a))
            .map(|f| (f, Rational::one()))
            .collect();
        lp.add_row(row, Sense::Ge, Rational::one());
    }
    let s = lp.solve()?;
    Ok(BoundReport { log2: LogValue::from_solution(s.value, exact), primal: s.x, dual: s.duals })
}

/// A set function over `k` attributes, stored by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFunction {
    pub k: usize,
    pub values: Vec<Rational>,
}

impl SetFunction {
    pub fn new(k: usize, f: impl Fn(AttrSet) -> Rational) -> Self {
        let values = (0..1u64 << k).map(|s| f(AttrSet(s))).collect();
        SetFunction { k, values }
    }

    /// `h(S) = Σ_{A ∈ S} ν_A`.
    pub fn modular(nu: &[Rational]) -> Self {
        SetFunction::new(nu.len(), |s| s.iter().map(|a| nu[a].clone()).sum())
    }

    pub fn get(&self, s: AttrSet) -> &Rational {
        &self.values[s.0 as usize]
    }

    pub fn is_zero_grounded(&self) -> bool {
        self.values[0].is_zero()
    }

    /// `h(X) ≤ h(Y)` for all `X ⊆ Y`, checked on single-element extensions.
    pub fn is_monotone(&self) -> bool {
        (0..self.values.len())
            .all(|s| (0..self.k).all(|i| s >> i & 1 == 1 || self.values[s] <= self.values[s | 1 << i]))
    }

    /// `h(X ∪ Y) + h(X ∩ Y) ≤ h(X) + h(Y)` over every pair of subsets.
    pub fn is_submodular(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|x| (0..n).all(|y| &self.values[x | y] + &self.values[x & y] <= &self.values[x] + &self.values[y]))
    }

    pub fn is_polymatroid(&self) -> bool {
        self.is_zero_grounded() && self.is_monotone() && self.is_submodular()
    }

    /// `h(Y) − h(X) ≤ log N` for every constraint, with exact logs.
    pub fn satisfies(&self, dc: &[DegreeConstraint]) -> bool {
        dc.iter().all(|c| {
            let (l, _) = log2_rational(c.n);
            self.get(c.y) - self.get(c.x) <= l
        })
    }
}

/// The set function realizing the polymatroid bound of an undirected pattern
/// with at most `m` edges and maximum degree `λ`, given the vertex sets of the
/// components of its fractional edge-cover decomposition.
///
/// When `λ² ≤ m` every non-empty `S` gets `log m + (|S| − 2) log λ`.
/// Otherwise subsets of a cycle get `|S|/2 · log m`, subsets of a star get
/// `log m + (|S| − 2) log λ`, and other sets add up over components.
pub fn construct_h_star(
    k: usize,
    log_m: &Rational,
    log_lambda: &Rational,
    small_lambda: bool,
    cycles: &[Vec<usize>],
    stars: &[Vec<usize>],
) -> SetFunction {
    let star_value = |size: usize| log_m + &(log_lambda * &Rational::from_int(size as i64 - 2));
    if small_lambda {
        return SetFunction::new(k, |s| if s.is_empty() { Rational::zero() } else { star_value(s.len()) });
    }
    let cycle_sets: Vec<AttrSet> = cycles.iter().map(|c| AttrSet::from_ids(c.iter().copied())).collect();
    let star_sets: Vec<AttrSet> = stars.iter().map(|c| AttrSet::from_ids(c.iter().copied())).collect();
    SetFunction::new(k, |s| {
        let mut total = Rational::zero();
        for c in &cycle_sets {
            let part = s.intersect(*c);
            if !part.is_empty() {
                total += &(log_m * &Rational::new(part.len() as i64, 2));
            }
        }
        for st in &star_sets {
            let part = s.intersect(*st);
            if !part.is_empty() {
                total += &star_value(part.len());
            }
        }
        total
    })
}

/// Feasibility for the undirected polymatroid LP: `h(∅) = 0`, `h({X,Y}) ≤ log m`
/// and `h({X,Y}) − h({X}) ≤ log λ` on every pattern edge, submodular, monotone.
pub fn satisfies_undirected_lp(
    h: &SetFunction,
    edges: &[(usize, usize)],
    log_m: &Rational,
    log_lambda: &Rational,
) -> bool {
    let edge_ok = edges.iter().all(|&(x, y)| {
        let xy = AttrSet::from_ids([x, y]);
        h.get(xy) <= log_m
            && h.get(xy) - h.get(AttrSet::singleton(x)) <= *log_lambda
            && h.get(xy) - h.get(AttrSet::singleton(y)) <= *log_lambda
    });
    edge_ok && h.is_polymatroid()
}
