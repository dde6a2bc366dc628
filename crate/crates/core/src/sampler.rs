//! Uniform join sampling under an acyclic set of degree constraints.
//!
//! One attempt walks the attributes in a topological order of the constraint
//! dependency graph. At each level it picks a random constraint bounding the
//! next attribute, draws a value from that constraint's fragment, keeps it
//! only if the constraint is the one with the largest relative degree, and
//! then passes a coin with probability `B_i(w_i) / (B_{i-1}(w_{i-1}) · reldeg*)`.
//! Every join result comes out with probability `1 / (B_0 · Π_i |DC(A_i)|)`.

use rand::Rng;
use rustc_hash::FxHashSet;

use crate::enumerate::{to_attribute_order, Enumerator, JoinTries};
use crate::error::{Error, Result};
use crate::index::FragmentIndex;
use crate::lp::bounds::{modular_bound, BoundReport};
use crate::model::{validate_and_close, ConstraintSet, DegreeConstraint, JoinQuery, Tuple, Value};
use crate::race::{race, RaceConfig, RaceOutcome};
use crate::rational::Rational;

/// Where an attempt stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    /// The chosen constraint has no fragment for the prefix.
    NoFragment { level: usize },
    /// The chosen constraint is not the one with the largest relative degree.
    NotCanonical { level: usize },
    /// The pass coin came up tails.
    Coin { level: usize },
    /// Some relation does not contain the projection of the full tuple.
    NotInJoin,
    /// The tuple repeats a value while distinct values are required.
    Repeated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Attempt {
    /// A join result in attribute-id order.
    Success(Tuple),
    Failed(Failure),
}

/// Running record of pass probabilities, with an exact certificate per step.
#[derive(Clone, Debug, Default)]
pub struct PassStats {
    pub steps: u64,
    pub max_pass: f64,
    /// Steps where the exact rational certificate for `p_pass ≤ 1` failed.
    pub certificate_failures: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// The enumerator finished first, so `value` is the exact output size.
    pub exact: bool,
    pub attempts: u64,
    pub successes: u64,
}

struct Membership {
    positions: Vec<usize>,
    rows: FxHashSet<Tuple>,
}

pub struct JoinSampler {
    pub query: JoinQuery,
    pub constraints: ConstraintSet,
    pub bound: BoundReport,
    pub index: FragmentIndex,
    tries: JoinTries,
    delta: Vec<f64>,
    /// Per level `i ∈ 1..=k`: the dual weights over `DC(A_i)` sum to at least 1.
    level_weight_ok: Vec<bool>,
    log_b0: f64,
    dc_product: f64,
    members: Vec<Membership>,
    distinct_values: bool,
}

impl JoinSampler {
    /// Validates `declared` (adding cardinality constraints) and preprocesses.
    pub fn new(q: &JoinQuery, declared: &[DegreeConstraint]) -> Result<Self> {
        let dc = validate_and_close(q, declared)?;
        Self::from_constraints(q, dc)
    }

    pub fn from_constraints(q: &JoinQuery, dc: ConstraintSet) -> Result<Self> {
        let k = q.num_attrs();
        let order = dc.dependency_graph(k).topological_order()?;
        let bound = modular_bound(&dc.constraints, k)?;
        let index = FragmentIndex::build(q, &dc, &order)?;
        let tries = JoinTries::build(q, &order)?;
        let delta: Vec<f64> = bound.dual.iter().map(Rational::to_f64).collect();
        let level_weight_ok = (0..=k)
            .map(|i| {
                i == 0 || {
                    let s: Rational = index.dc_of_level[i].iter().map(|&c| bound.dual[c].clone()).sum();
                    s >= Rational::one()
                }
            })
            .collect();
        let log_b0 = index.log_b_value(&[], &delta);
        let dc_product = (1..=k).map(|i| index.dc_of_level[i].len() as f64).product();
        let members = q
            .relations
            .iter()
            .map(|r| {
                let positions = r.schema.iter().map(|&a| index.position[a]).collect();
                Membership { positions, rows: r.rows.iter().cloned().collect() }
            })
            .collect();
        Ok(JoinSampler {
            query: q.clone(),
            constraints: dc,
            bound,
            index,
            tries,
            delta,
            level_weight_ok,
            log_b0,
            dc_product,
            members,
            distinct_values: false,
        })
    }

    /// Only accept tuples whose values are pairwise distinct (used for
    /// subgraph occurrences, where the join carries one attribute per vertex).
    pub fn require_distinct_values(mut self) -> Self {
        self.distinct_values = true;
        self
    }

    pub fn order(&self) -> &[usize] {
        &self.index.order
    }

    /// `log₂ B_0`, the data-dependent bound at the empty prefix.
    pub fn log_b0(&self) -> f64 {
        self.log_b0
    }

    /// `Π_i |DC(A_i)|`.
    pub fn dc_product(&self) -> f64 {
        self.dc_product
    }

    /// Probability that one attempt returns a given join result.
    pub fn per_result_probability(&self) -> f64 {
        if self.log_b0 == f64::NEG_INFINITY {
            0.0
        } else {
            1.0 / (self.log_b0.exp2() * self.dc_product)
        }
    }

    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Attempt {
        self.attempt_inner(rng, None)
    }

    /// Like [`attempt`](Self::attempt), also checking an exact rational
    /// certificate of `p_pass ≤ 1` at every step.
    pub fn attempt_checked<R: Rng + ?Sized>(&self, rng: &mut R, stats: &mut PassStats) -> Attempt {
        self.attempt_inner(rng, Some(stats))
    }

    fn attempt_inner<R: Rng + ?Sized>(&self, rng: &mut R, mut stats: Option<&mut PassStats>) -> Attempt {
        let k = self.index.num_attrs();
        let mut w: Vec<Value> = Vec::with_capacity(k);
        let mut log_b_prev = self.log_b0;
        if log_b_prev == f64::NEG_INFINITY {
            return Attempt::Failed(Failure::NoFragment { level: 1 });
        }
        for i in 1..=k {
            let dc_i = &self.index.dc_of_level[i];
            let chosen = dc_i[rng.gen_range(0..dc_i.len())];
            let Some(frag) = self.index.fragment(chosen, &w) else {
                return Attempt::Failed(Failure::NoFragment { level: i });
            };
            let u = &frag.rows[rng.gen_range(0..frag.rows.len())];
            let col = self.index.y_column(chosen, self.index.order[i - 1]).expect("attribute in Y");
            w.push(u[col]);
            let (star, star_c) = match self.index.reldeg_star(&w) {
                Ok(r) => r,
                Err(Error::EmptyDenominator { level }) => return Attempt::Failed(Failure::NoFragment { level }),
                Err(e) => panic!("relative degree lookup failed: {e}"),
            };
            if star_c != chosen {
                return Attempt::Failed(Failure::NotCanonical { level: i });
            }
            let log_b = self.index.log_b_value(&w, &self.delta);
            let p = if log_b == f64::NEG_INFINITY {
                0.0
            } else {
                (log_b - log_b_prev).exp2() * (star.1 as f64 / star.0 as f64)
            };
            assert!(p <= 1.0 + 1e-12, "pass probability {p} exceeds 1 at level {i}");
            if let Some(s) = stats.as_deref_mut() {
                s.steps += 1;
                s.max_pass = s.max_pass.max(p);
                if !self.pass_certificate(i, &w, star) {
                    s.certificate_failures += 1;
                }
            }
            if rng.gen::<f64>() >= p {
                return Attempt::Failed(Failure::Coin { level: i });
            }
            log_b_prev = log_b;
        }
        for m in &self.members {
            let proj: Tuple = m.positions.iter().map(|&p| w[p]).collect();
            if !m.rows.contains(&proj) {
                return Attempt::Failed(Failure::NotInJoin);
            }
        }
        if self.distinct_values && !all_distinct(&w) {
            return Attempt::Failed(Failure::Repeated);
        }
        Attempt::Success(to_attribute_order(&self.index.order, &w))
    }

    /// Exact proof that `p_pass ≤ 1` at level `i`: every constraint bounding
    /// `A_i` shrinks by at most `reldeg*`, every other constraint does not
    /// grow, and the dual weights over `DC(A_i)` sum to at least 1.
    fn pass_certificate(&self, i: usize, w: &[Value], star: (u64, u64)) -> bool {
        if !self.level_weight_ok[i] {
            return false;
        }
        let prev = &w[..i - 1];
        let in_level = &self.index.dc_of_level[i];
        (0..self.constraints.len()).all(|c| {
            let Some(now) = self.index.fragment(c, w) else { return true };
            let before = self.index.fragment(c, prev).map_or(0, |f| f.degree) as u128;
            let now = now.degree as u128;
            if in_level.contains(&c) {
                now * star.1 as u128 <= star.0 as u128 * before
            } else {
                now <= before
            }
        })
    }

    pub fn enumerator(&self) -> impl Enumerator<Item = Tuple> + Send + '_ {
        self.tries.enumerator(self.distinct_values)
    }

    /// Every join result (respecting the distinct-values filter), sorted, in
    /// attribute-id order.
    pub fn enumerate_all(&self) -> Vec<Tuple> {
        let mut e = self.enumerator();
        while !e.step(usize::MAX) {}
        let mut out: Vec<Tuple> = e.into_results().iter().map(|t| to_attribute_order(&self.index.order, t)).collect();
        out.sort_unstable();
        out
    }

    /// A uniformly random join result, or `None` when the join is empty.
    pub fn sample<R: Rng + Send>(&self, rng: &mut R, cfg: &RaceConfig) -> Option<Tuple> {
        let mut e = self.enumerator();
        let (outcome, _) = race(
            || match self.attempt(rng) {
                Attempt::Success(t) => Some(t),
                Attempt::Failed(_) => None,
            },
            &mut e,
            cfg,
        );
        match outcome {
            RaceOutcome::Sampled(t) => Some(t),
            RaceOutcome::Enumerated => {
                let all = e.results();
                if all.is_empty() {
                    None
                } else {
                    Some(to_attribute_order(&self.index.order, &all[rng.gen_range(0..all.len())]))
                }
            }
        }
    }

    /// Estimates the output size within relative error `epsilon` by counting
    /// successes: stops at `48/ε² · max(1, ln(1/(1−confidence)) / ln 100)`
    /// successes, or returns the exact count if the enumerator finishes first.
    pub fn estimate_out<R: Rng>(&self, rng: &mut R, epsilon: f64, confidence: f64, cfg: &RaceConfig) -> Estimate {
        assert!(epsilon > 0.0 && (0.0..1.0).contains(&confidence), "invalid estimator parameters");
        let scale = ((1.0 / (1.0 - confidence)).ln() / 100f64.ln()).max(1.0);
        let target = (48.0 / (epsilon * epsilon) * scale).ceil() as u64;
        let mut e = self.enumerator();
        let (mut attempts, mut successes) = (0u64, 0u64);
        loop {
            for _ in 0..cfg.sampler_attempts.max(1) {
                attempts += 1;
                if matches!(self.attempt(rng), Attempt::Success(_)) {
                    successes += 1;
                }
            }
            if successes >= target {
                let value = (successes as f64 / attempts as f64 / self.per_result_probability()).round();
                return Estimate { value, exact: false, attempts, successes };
            }
            if cfg.enumerator_steps > 0 && e.step(cfg.enumerator_steps) {
                let value = e.results().len() as f64;
                return Estimate { value, exact: true, attempts, successes };
            }
        }
    }

    /// The join result in uniformly random order.
    ///
    /// Draws by rejecting already-seen results; once the seen count reaches
    /// `max(16, estimate / 2)` or the interleaved enumerator finishes, the
    /// remaining results are appended in a uniformly shuffled order.
    pub fn random_permutation<R: Rng>(&self, rng: &mut R, cfg: &RaceConfig) -> Vec<Tuple> {
        let mut e = self.enumerator();
        let mut seen: FxHashSet<Tuple> = FxHashSet::default();
        let mut out = Vec::new();
        let (mut attempts, mut successes) = (0u64, 0u64);
        let p = self.per_result_probability();
        loop {
            for _ in 0..cfg.sampler_attempts.max(1) {
                attempts += 1;
                if let Attempt::Success(t) = self.attempt(rng) {
                    successes += 1;
                    if seen.insert(t.clone()) {
                        out.push(t);
                    }
                }
                let estimate = if p > 0.0 { successes as f64 / attempts as f64 / p } else { 0.0 };
                if successes > 0 && seen.len() as f64 >= (estimate / 2.0).max(16.0) {
                    append_shuffled(self.enumerate_all(), &seen, &mut out, rng);
                    return out;
                }
            }
            if cfg.enumerator_steps > 0 && e.step(cfg.enumerator_steps) {
                let order = &self.index.order;
                let all = e.results().iter().map(|t| to_attribute_order(order, t)).collect();
                append_shuffled(all, &seen, &mut out, rng);
                return out;
            }
        }
    }
}

fn append_shuffled<R: Rng>(all: Vec<Tuple>, seen: &FxHashSet<Tuple>, out: &mut Vec<Tuple>, rng: &mut R) {
    use rand::seq::SliceRandom;
    let mut rest: Vec<Tuple> = all.into_iter().filter(|t| !seen.contains(t)).collect();
    rest.shuffle(rng);
    out.extend(rest);
}

pub fn all_distinct(t: &[Value]) -> bool {
    (0..t.len()).all(|i| !t[i + 1..].contains(&t[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttrSet, QueryBuilder};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_query() -> JoinQuery {
        let mut b = QueryBuilder::new();
        let r: Vec<Vec<&str>> = vec![vec!["1", "a"], vec!["1", "b"], vec!["2", "a"], vec!["3", "c"]];
        let s: Vec<Vec<&str>> = vec![vec!["a", "x"], vec!["a", "y"], vec!["b", "x"], vec!["d", "z"]];
        b.relation("R", &["A", "B"], r).unwrap();
        b.relation("S", &["B", "C"], s).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn attempts_only_return_join_results() {
        let q = path_query();
        let fan = DegreeConstraint::new(AttrSet::singleton(1), AttrSet::from_ids([1, 2]), 2).unwrap();
        let s = JoinSampler::new(&q, &[fan]).unwrap();
        let all = s.enumerate_all();
        assert_eq!(all.len(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut stats = PassStats::default();
        let mut hits = 0;
        for _ in 0..20_000 {
            if let Attempt::Success(t) = s.attempt_checked(&mut rng, &mut stats) {
                assert!(all.binary_search(&t).is_ok());
                hits += 1;
            }
        }
        assert!(hits > 0);
        assert_eq!(stats.certificate_failures, 0);
        assert!(stats.max_pass <= 1.0 + 1e-12);
    }

    #[test]
    fn empty_join_is_reported() {
        let mut b = QueryBuilder::new();
        b.relation("R", &["A", "B"], vec![vec!["1", "2"]]).unwrap();
        b.relation("S", &["B", "C"], vec![vec!["3", "4"]]).unwrap();
        let q = b.build().unwrap();
        let s = JoinSampler::new(&q, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.sample(&mut rng, &RaceConfig::default()), None);
        let est = s.estimate_out(&mut rng, 0.5, 0.99, &RaceConfig::default());
        assert!(est.exact);
        assert_eq!(est.value, 0.0);
        assert!(s.random_permutation(&mut rng, &RaceConfig::default()).is_empty());
    }

    #[test]
    fn permutation_covers_everything_once() {
        let q = path_query();
        let s = JoinSampler::new(&q, &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut perm = s.random_permutation(&mut rng, &RaceConfig::default());
        perm.sort();
        assert_eq!(perm, s.enumerate_all());
    }

    #[test]
    fn cyclic_constraints_are_rejected() {
        let mut b = QueryBuilder::new();
        b.relation("R", &["A", "B"], vec![vec!["1", "2"]]).unwrap();
        let q = b.build().unwrap();
        let ab = DegreeConstraint::new(AttrSet::singleton(0), AttrSet::from_ids([0, 1]), 1).unwrap();
        let ba = DegreeConstraint::new(AttrSet::singleton(1), AttrSet::from_ids([0, 1]), 1).unwrap();
        assert!(matches!(JoinSampler::new(&q, &[ab, ba]), Err(Error::CyclicConstraints { .. })));
    }
}
