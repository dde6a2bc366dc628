//! Fragment index: for each constraint and each prefix level, the guard's
//! tuples grouped by their projection onto the already-fixed attributes.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::{AttrSet, ConstraintSet, JoinQuery, Tuple, Value};

/// `π_Y(R ⋉ w)` for one prefix `w`, with its true degree `deg_{Y|X}(R ⋉ w)`.
#[derive(Clone, Debug)]
pub struct Fragment {
    /// Distinct `Y`-projections, columns in ascending attribute id.
    pub rows: Vec<Tuple>,
    pub degree: u64,
}

#[derive(Debug)]
struct KeyMap {
    /// Prefix positions making up the key, ascending.
    key_positions: Vec<usize>,
    map: FxHashMap<Tuple, Fragment>,
}

#[derive(Debug)]
struct ConstraintFragments {
    /// Level `0..=k` → index into `maps`. Levels with the same key share a map.
    level_map: Vec<usize>,
    maps: Vec<KeyMap>,
    /// Ascending attribute ids of `Y`.
    y_attrs: Vec<usize>,
}

/// A fragment index over a query under a fixed attribute order.
#[derive(Debug)]
pub struct FragmentIndex {
    pub order: Vec<usize>,
    /// Attribute id → position in `order`.
    pub position: Vec<usize>,
    pub constraints: ConstraintSet,
    /// Level `i ∈ 1..=k` → constraints with `order[i-1] ∈ Y − X`, ascending.
    pub dc_of_level: Vec<Vec<usize>>,
    fragments: Vec<ConstraintFragments>,
}

#[derive(Clone, Debug, Default)]
pub struct IndexStats {
    pub constraints: usize,
    pub key_maps: usize,
    pub fragments: usize,
    pub stored_rows: usize,
    /// Entry `i` counts fragments holding between `2^i` and `2^(i+1) − 1` rows.
    pub size_histogram: Vec<usize>,
}

impl FragmentIndex {
    pub fn build(q: &JoinQuery, dc: &ConstraintSet, order: &[usize]) -> Result<Self> {
        let k = q.num_attrs();
        let mut position = vec![usize::MAX; k];
        for (p, &a) in order.iter().enumerate() {
            position[a] = p;
        }
        if order.len() != k || position.contains(&usize::MAX) {
            return Err(Error::Schema("attribute order must be a permutation of the attributes".into()));
        }
        let mut dc_of_level = vec![Vec::new(); k + 1];
        for (i, lv) in dc_of_level.iter_mut().enumerate().skip(1) {
            *lv = dc.constraints_of_attribute(order[i - 1]);
        }

        let mut fragments = Vec::with_capacity(dc.len());
        for (c, &g) in dc.constraints.iter().zip(&dc.guards) {
            let r = &q.relations[g];
            let y_attrs = c.y.ids();
            let y_cols = r.columns(c.y);
            let x_in_y: Vec<usize> = c.x.iter().map(|a| y_attrs.iter().position(|&b| b == a).unwrap()).collect();
            let mut level_map = Vec::with_capacity(k + 1);
            let mut maps: Vec<KeyMap> = Vec::new();
            let mut prefix = AttrSet::EMPTY;
            for level in 0..=k {
                if level > 0 {
                    prefix.insert(order[level - 1]);
                }
                let key_set = prefix.intersect(r.attrs());
                let mut key_positions: Vec<usize> = key_set.iter().map(|a| position[a]).collect();
                key_positions.sort_unstable();
                if let Some(last) = maps.last() {
                    if last.key_positions == key_positions {
                        level_map.push(maps.len() - 1);
                        continue;
                    }
                }
                let key_cols: Vec<usize> = key_positions.iter().map(|&p| r.column_of(order[p]).unwrap()).collect();
                let x_known = c.x.is_subset(key_set);
                let mut grouped: FxHashMap<Tuple, (Vec<Tuple>, rustc_hash::FxHashSet<Tuple>)> = FxHashMap::default();
                for row in &r.rows {
                    let key: Tuple = key_cols.iter().map(|&col| row[col]).collect();
                    let y: Tuple = y_cols.iter().map(|&col| row[col]).collect();
                    let e = grouped.entry(key).or_default();
                    if e.1.insert(y.clone()) {
                        e.0.push(y);
                    }
                }
                let map = grouped
                    .into_iter()
                    .map(|(key, (rows, _))| {
                        let degree = if x_known { rows.len() as u64 } else { max_group(&rows, &x_in_y) };
                        (key, Fragment { rows, degree })
                    })
                    .collect();
                maps.push(KeyMap { key_positions, map });
                level_map.push(maps.len() - 1);
            }
            fragments.push(ConstraintFragments { level_map, maps, y_attrs });
        }
        Ok(FragmentIndex { order: order.to_vec(), position, constraints: dc.clone(), dc_of_level, fragments })
    }

    pub fn num_attrs(&self) -> usize {
        self.order.len()
    }

    /// The fragment of constraint `c` for prefix `w` (level `w.len()`), if any.
    pub fn fragment(&self, c: usize, w: &[Value]) -> Option<&Fragment> {
        let cf = &self.fragments[c];
        let km = &cf.maps[cf.level_map[w.len()]];
        let mut buf = [0 as Value; crate::model::MAX_ATTRS];
        for (slot, &p) in buf.iter_mut().zip(&km.key_positions) {
            *slot = w[p];
        }
        km.map.get(&buf[..km.key_positions.len()])
    }

    /// Column of attribute `a` within the rows of constraint `c`'s fragments.
    pub fn y_column(&self, c: usize, a: usize) -> Option<usize> {
        self.fragments[c].y_attrs.iter().position(|&b| b == a)
    }

    /// `deg(w_{i-1} + a) / deg(w_{i-1})` for `c ∈ DC(A_i)`, as `(num, den)`;
    /// `w` is the extended prefix of length `i`.
    pub fn reldeg(&self, c: usize, w: &[Value]) -> Result<(u64, u64)> {
        let i = w.len();
        let den = self.fragment(c, &w[..i - 1]).ok_or(Error::EmptyDenominator { level: i - 1 })?.rows.len() as u64;
        let num = self.fragment(c, w).map_or(0, |f| f.rows.len() as u64);
        Ok((num, den))
    }

    /// The largest relative degree over `DC(A_i)` (first constraint wins ties)
    /// and the constraint achieving it.
    pub fn reldeg_star(&self, w: &[Value]) -> Result<((u64, u64), usize)> {
        let i = w.len();
        let mut best: Option<((u64, u64), usize)> = None;
        for &c in &self.dc_of_level[i] {
            let r = self.reldeg(c, w)?;
            let better = match best {
                None => true,
                Some((b, _)) => (r.0 as u128) * (b.1 as u128) > (b.0 as u128) * (r.1 as u128),
            };
            if better {
                best = Some((r, c));
            }
        }
        best.ok_or_else(|| Error::Schema(format!("no constraint bounds level {i}")))
    }

    /// `log₂ B(w) = Σ_c δ_c log₂ deg_c(w)`, or `−∞` when some constraint has
    /// no fragment for `w`.
    pub fn log_b_value(&self, w: &[Value], delta: &[f64]) -> f64 {
        let mut total = 0.0;
        for (c, &d) in delta.iter().enumerate() {
            match self.fragment(c, w) {
                None => return f64::NEG_INFINITY,
                Some(f) => {
                    if d != 0.0 {
                        total += d * (f.degree as f64).log2();
                    }
                }
            }
        }
        total
    }

    pub fn stats(&self) -> IndexStats {
        let mut s = IndexStats { constraints: self.fragments.len(), ..Default::default() };
        for cf in &self.fragments {
            s.key_maps += cf.maps.len();
            for km in &cf.maps {
                s.fragments += km.map.len();
                for f in km.map.values() {
                    s.stored_rows += f.rows.len();
                    let bucket = f.rows.len().max(1).ilog2() as usize;
                    if s.size_histogram.len() <= bucket {
                        s.size_histogram.resize(bucket + 1, 0);
                    }
                    s.size_histogram[bucket] += 1;
                }
            }
        }
        s
    }
}

fn max_group(rows: &[Tuple], x_in_y: &[usize]) -> u64 {
    if x_in_y.is_empty() {
        return rows.len() as u64;
    }
    let mut counts: FxHashMap<Tuple, u64> = FxHashMap::default();
    for r in rows {
        *counts.entry(x_in_y.iter().map(|&p| r[p]).collect()).or_default() += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_and_close, DegreeConstraint, QueryBuilder};

    fn star_query() -> (JoinQuery, ConstraintSet) {
        // R(A,B): a1 → {b1, b2, b3}, a2 → {b1}. S(B,C): b1 → {c1, c2}.
        let mut b = QueryBuilder::new();
        let r: Vec<Vec<&str>> = vec![vec!["a1", "b1"], vec!["a1", "b2"], vec!["a1", "b3"], vec!["a2", "b1"]];
        let s: Vec<Vec<&str>> = vec![vec!["b1", "c1"], vec!["b1", "c2"]];
        b.relation("R", &["A", "B"], r).unwrap();
        b.relation("S", &["B", "C"], s).unwrap();
        let q = b.build().unwrap();
        let fan = DegreeConstraint::new(AttrSet::singleton(0), AttrSet::from_ids([0, 1]), 3).unwrap();
        let dc = validate_and_close(&q, &[fan]).unwrap();
        (q, dc)
    }

    #[test]
    fn fragments_and_degrees() {
        let (q, dc) = star_query();
        let idx = FragmentIndex::build(&q, &dc, &[0, 1, 2]).unwrap();
        // Constraints in canonical order: (∅,AB,4), (∅,BC,2), (A,AB,3).
        assert_eq!(dc.constraints[2].x, AttrSet::singleton(0));
        let root = idx.fragment(0, &[]).unwrap();
        assert_eq!(root.rows.len(), 4);
        // (A, AB): with nothing fixed the degree is the max fan-out 3.
        assert_eq!(idx.fragment(2, &[]).unwrap().degree, 3);
        let a1 = q.values.iter().position(|v| v == "a1").unwrap() as Value;
        assert_eq!(idx.fragment(2, &[a1]).unwrap().degree, 3);
        // (∅, BC) keyed on nothing until B is fixed.
        assert_eq!(idx.fragment(1, &[a1]).unwrap().rows.len(), 2);
        let b2 = q.values.iter().position(|v| v == "b2").unwrap() as Value;
        assert!(idx.fragment(1, &[a1, b2]).is_none());
        assert_eq!(idx.log_b_value(&[a1, b2], &[1.0, 1.0, 0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn reldeg_star_prefers_first_on_ties() {
        let (q, dc) = star_query();
        let idx = FragmentIndex::build(&q, &dc, &[0, 1, 2]).unwrap();
        let a1 = q.values.iter().position(|v| v == "a1").unwrap() as Value;
        // Level 1 (A): only (∅, AB, 4) bounds A. a1 covers 3 of 4 rows.
        let (r, c) = idx.reldeg_star(&[a1]).unwrap();
        assert_eq!((r, c), ((3, 4), 0));
        let b1 = q.values.iter().position(|v| v == "b1").unwrap() as Value;
        // Level 2 (B): (∅,AB) gives 1/3, (∅,BC) gives 2/2, (A,AB) gives 1/3.
        let (r, c) = idx.reldeg_star(&[a1, b1]).unwrap();
        assert_eq!((r, c), ((2, 2), 1));
    }
}
