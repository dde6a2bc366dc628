//! Resumable worst-case-optimal-style join enumeration (generic join with
//! sorted candidate lists), used by the race and as the exact fallback.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::{JoinQuery, Tuple, Value};

/// A computation that can be advanced a bounded number of steps at a time.
pub trait Enumerator {
    type Item;

    /// Runs at most `budget` steps. Returns `true` once enumeration is complete.
    fn step(&mut self, budget: usize) -> bool;

    fn is_done(&self) -> bool;

    fn results(&self) -> &[Self::Item];

    fn into_results(self) -> Vec<Self::Item>;
}

#[derive(Debug)]
struct Extension {
    /// Prefix positions forming the key (relation attributes already fixed).
    key_positions: Vec<usize>,
    /// Key → sorted distinct values of the level's attribute.
    values: FxHashMap<Tuple, Vec<Value>>,
}

/// Per-level extension lists of every relation, under a fixed attribute order.
#[derive(Debug)]
pub struct JoinTries {
    pub order: Vec<usize>,
    /// Level `i ∈ 1..=k` → one extension map per relation containing `order[i-1]`.
    levels: Vec<Vec<Extension>>,
}

impl JoinTries {
    pub fn build(q: &JoinQuery, order: &[usize]) -> Result<Self> {
        let k = q.num_attrs();
        let mut position = vec![usize::MAX; k];
        for (p, &a) in order.iter().enumerate() {
            position[a] = p;
        }
        if order.len() != k || position.contains(&usize::MAX) {
            return Err(Error::Schema("attribute order must be a permutation of the attributes".into()));
        }
        let mut levels = vec![Vec::new()];
        for (i, &a) in order.iter().enumerate() {
            let mut exts = Vec::new();
            for r in &q.relations {
                let Some(acol) = r.column_of(a) else { continue };
                let mut key_positions: Vec<usize> = r.schema.iter().map(|&b| position[b]).filter(|&p| p < i).collect();
                key_positions.sort_unstable();
                let key_cols: Vec<usize> = key_positions.iter().map(|&p| r.column_of(order[p]).unwrap()).collect();
                let mut values: FxHashMap<Tuple, Vec<Value>> = FxHashMap::default();
                for row in &r.rows {
                    values.entry(key_cols.iter().map(|&c| row[c]).collect()).or_default().push(row[acol]);
                }
                for v in values.values_mut() {
                    v.sort_unstable();
                    v.dedup();
                }
                exts.push(Extension { key_positions, values });
            }
            levels.push(exts);
        }
        Ok(JoinTries { order: order.to_vec(), levels })
    }

    fn candidates<'a>(&self, ext: &'a Extension, prefix: &[Value]) -> Option<&'a [Value]> {
        let mut buf = [0 as Value; crate::model::MAX_ATTRS];
        for (slot, &p) in buf.iter_mut().zip(&ext.key_positions) {
            *slot = prefix[p];
        }
        ext.values.get(&buf[..ext.key_positions.len()]).map(Vec::as_slice)
    }

    pub fn enumerator(&self, distinct_values: bool) -> JoinEnumerator<'_> {
        JoinEnumerator {
            tries: self,
            distinct_values,
            frames: Vec::new(),
            prefix: Vec::new(),
            results: Vec::new(),
            started: false,
            done: false,
        }
    }
}

struct Frame<'a> {
    candidates: &'a [Value],
    /// Which extension supplied `candidates` (skipped when checking).
    source: usize,
    next: usize,
}

/// Enumerates join results as tuples in attribute-order positions.
pub struct JoinEnumerator<'a> {
    tries: &'a JoinTries,
    distinct_values: bool,
    frames: Vec<Frame<'a>>,
    prefix: Vec<Value>,
    results: Vec<Tuple>,
    started: bool,
    done: bool,
}

impl<'a> JoinEnumerator<'a> {
    /// Candidates for the next level from the shortest extension list, or
    /// `None` when some relation has no extension for the current prefix.
    fn open_frame(&self) -> Option<Frame<'a>> {
        let level = self.prefix.len() + 1;
        let mut best: Option<Frame<'a>> = None;
        for (e, ext) in self.tries.levels[level].iter().enumerate() {
            let c = self.tries.candidates(ext, &self.prefix)?;
            if best.as_ref().is_none_or(|b| c.len() < b.candidates.len()) {
                best = Some(Frame { candidates: c, source: e, next: 0 });
            }
        }
        best
    }

    fn accepts(&self, source: usize, a: Value) -> bool {
        if self.distinct_values && self.prefix.contains(&a) {
            return false;
        }
        let level = self.prefix.len() + 1;
        self.tries.levels[level].iter().enumerate().all(|(e, ext)| {
            e == source || self.tries.candidates(ext, &self.prefix).is_some_and(|c| c.binary_search(&a).is_ok())
        })
    }
}

impl Enumerator for JoinEnumerator<'_> {
    type Item = Tuple;

    fn step(&mut self, mut budget: usize) -> bool {
        let k = self.tries.order.len();
        if !self.started {
            self.started = true;
            if k == 0 {
                self.results.push(Vec::new());
                self.done = true;
            } else if let Some(f) = self.open_frame() {
                self.frames.push(f);
            } else {
                self.done = true;
            }
        }
        while !self.done && budget > 0 {
            let Some(top) = self.frames.last_mut() else {
                self.done = true;
                break;
            };
            if top.next == top.candidates.len() {
                self.frames.pop();
                self.prefix.pop();
                if self.frames.is_empty() {
                    self.done = true;
                }
                continue;
            }
            let a = top.candidates[top.next];
            let source = top.source;
            top.next += 1;
            budget -= 1;
            if !self.accepts(source, a) {
                continue;
            }
            self.prefix.push(a);
            if self.prefix.len() == k {
                self.results.push(self.prefix.clone());
                self.prefix.pop();
            } else if let Some(f) = self.open_frame() {
                self.frames.push(f);
            } else {
                self.prefix.pop();
            }
        }
        self.done
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn results(&self) -> &[Tuple] {
        &self.results
    }

    fn into_results(self) -> Vec<Tuple> {
        self.results
    }
}

/// Reorders a tuple from attribute-order positions to attribute-id order.
pub fn to_attribute_order(order: &[usize], t: &[Value]) -> Tuple {
    let mut out = vec![0; t.len()];
    for (p, &a) in order.iter().enumerate() {
        out[a] = t[p];
    }
    out
}

/// All join results in attribute-id order, sorted.
pub fn full_join(q: &JoinQuery) -> Result<Vec<Tuple>> {
    let order: Vec<usize> = (0..q.num_attrs()).collect();
    let tries = JoinTries::build(q, &order)?;
    let mut e = tries.enumerator(false);
    while !e.step(usize::MAX) {}
    let mut out = e.into_results();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QueryBuilder;

    #[test]
    fn triangle_join_resumes_across_budgets() {
        let mut b = QueryBuilder::new();
        let edges: Vec<Vec<String>> = [(1, 2), (2, 3), (3, 1), (1, 3), (3, 4), (4, 1)]
            .iter()
            .map(|(x, y)| vec![x.to_string(), y.to_string()])
            .collect();
        b.relation("R", &["A", "B"], edges.clone()).unwrap();
        b.relation("S", &["B", "C"], edges.clone()).unwrap();
        b.relation("T", &["C", "A"], edges).unwrap();
        let q = b.build().unwrap();
        let all = full_join(&q).unwrap();
        // Directed triangles: 1→2→3→1 and 1→3→4→1 in each of 3 rotations.
        assert_eq!(all.len(), 6);

        let tries = JoinTries::build(&q, &[2, 0, 1]).unwrap();
        let mut e = tries.enumerator(false);
        let mut rounds = 0;
        while !e.step(1) {
            rounds += 1;
        }
        assert!(rounds > 1);
        let mut got: Vec<Tuple> = e.into_results().iter().map(|t| to_attribute_order(&[2, 0, 1], t)).collect();
        got.sort();
        assert_eq!(got, all);
    }
}
