//! Join queries, relations, degree constraints and the constraint
//! dependency graph.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// Dense id of an interned attribute value.
pub type Value = u32;
pub type Tuple = Vec<Value>;

/// Maximum number of attributes a query may use.
pub const MAX_ATTRS: usize = 64;

/// A set of attribute ids stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AttrSet(pub u64);

impl AttrSet {
    pub const EMPTY: AttrSet = AttrSet(0);

    pub fn singleton(a: usize) -> Self {
        AttrSet(1 << a)
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        AttrSet(ids.into_iter().fold(0, |m, a| m | (1u64 << a)))
    }

    /// All attributes `0..k`.
    pub fn full(k: usize) -> Self {
        if k >= 64 {
            AttrSet(u64::MAX)
        } else {
            AttrSet((1u64 << k) - 1)
        }
    }

    pub fn contains(self, a: usize) -> bool {
        a < 64 && self.0 >> a & 1 == 1
    }

    pub fn insert(&mut self, a: usize) {
        self.0 |= 1 << a;
    }

    pub fn with(self, a: usize) -> Self {
        AttrSet(self.0 | 1 << a)
    }

    pub fn without(self, a: usize) -> Self {
        AttrSet(self.0 & !(1 << a))
    }

    pub fn union(self, o: Self) -> Self {
        AttrSet(self.0 | o.0)
    }

    pub fn intersect(self, o: Self) -> Self {
        AttrSet(self.0 & o.0)
    }

    pub fn minus(self, o: Self) -> Self {
        AttrSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_proper_subset(self, o: Self) -> bool {
        self.is_subset(o) && self != o
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Attribute ids in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let a = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(a)
            }
        })
    }

    pub fn ids(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lexicographic order on the ascending id lists.
    pub fn cmp_lex(self, o: Self) -> Ordering {
        self.iter().cmp(o.iter())
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    /// Attribute ids in column order.
    pub schema: Vec<usize>,
    /// Distinct rows, in first-occurrence order.
    pub rows: Vec<Tuple>,
}

impl Relation {
    /// Builds a relation, dropping duplicate rows.
    pub fn new(name: impl Into<String>, schema: Vec<usize>, rows: Vec<Tuple>) -> Result<Self> {
        let name = name.into();
        let mut seen_attr = HashSet::new();
        for &a in &schema {
            if a >= MAX_ATTRS {
                return Err(Error::Schema(format!("relation {name}: attribute id {a} out of range")));
            }
            if !seen_attr.insert(a) {
                return Err(Error::Schema(format!("relation {name}: attribute {a} repeated in schema")));
            }
        }
        let mut seen = HashSet::with_capacity(rows.len());
        let mut dedup = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "relation {name}: row of width {} for schema of width {}",
                    r.len(),
                    schema.len()
                )));
            }
            if seen.insert(r.clone()) {
                dedup.push(r);
            }
        }
        Ok(Relation { name, schema, rows: dedup })
    }

    pub fn attrs(&self) -> AttrSet {
        AttrSet::from_ids(self.schema.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_of(&self, a: usize) -> Option<usize> {
        self.schema.iter().position(|&b| b == a)
    }

    /// Column positions of `attrs` (ascending attribute id).
    pub fn columns(&self, attrs: AttrSet) -> Vec<usize> {
        attrs.iter().map(|a| self.column_of(a).expect("attribute in schema")).collect()
    }

    /// `deg_{Y|X}(R)`: the largest number of distinct `Y`-projections sharing
    /// one `X`-projection. For `X = ∅` this is `|π_Y R|`.
    pub fn degree(&self, x: AttrSet, y: AttrSet) -> Result<u64> {
        if !y.is_subset(self.attrs()) {
            return Err(Error::Schema(format!("{:?} is not within the schema of {}", y, self.name)));
        }
        if !x.is_proper_subset(y) {
            return Err(Error::Schema(format!("{x:?} is not a proper subset of {y:?}")));
        }
        let xc = self.columns(x);
        let yc = self.columns(y);
        let mut groups: HashMap<Vec<Value>, HashSet<Vec<Value>>> = HashMap::new();
        for r in &self.rows {
            let xk: Vec<Value> = xc.iter().map(|&c| r[c]).collect();
            let yk: Vec<Value> = yc.iter().map(|&c| r[c]).collect();
            groups.entry(xk).or_default().insert(yk);
        }
        Ok(groups.values().map(|s| s.len() as u64).max().unwrap_or(0))
    }
}

#[derive(Clone, Debug)]
pub struct JoinQuery {
    pub attributes: Vec<String>,
    pub relations: Vec<Relation>,
    /// Display names of interned values, indexed by value id.
    pub values: Vec<String>,
}

impl JoinQuery {
    pub fn new(attributes: Vec<String>, relations: Vec<Relation>, values: Vec<String>) -> Result<Self> {
        let k = attributes.len();
        if k > MAX_ATTRS {
            return Err(Error::TooLarge(format!("{k} attributes (at most {MAX_ATTRS})")));
        }
        let mut covered = AttrSet::EMPTY;
        for r in &relations {
            if let Some(&a) = r.schema.iter().find(|&&a| a >= k) {
                return Err(Error::Schema(format!("relation {} uses unknown attribute id {a}", r.name)));
            }
            if let Some(v) = r.rows.iter().flatten().find(|&&v| v as usize >= values.len()) {
                return Err(Error::Schema(format!("relation {} uses unknown value id {v}", r.name)));
            }
            covered = covered.union(r.attrs());
        }
        if let Some(a) = AttrSet::full(k).minus(covered).iter().next() {
            return Err(Error::UncoveredAttribute(attributes[a].clone()));
        }
        Ok(JoinQuery { attributes, relations, values })
    }

    pub fn num_attrs(&self) -> usize {
        self.attributes.len()
    }

    pub fn attr_id(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    pub fn attr_set_names(&self, s: AttrSet) -> String {
        let names: Vec<&str> = s.iter().map(|a| self.attributes[a].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Input size: total number of rows.
    pub fn input_size(&self) -> usize {
        self.relations.iter().map(Relation::len).sum()
    }

    pub fn value_name(&self, v: Value) -> &str {
        &self.values[v as usize]
    }
}

/// Incremental construction of a query from named attributes and string values.
#[derive(Default)]
pub struct QueryBuilder {
    attributes: Vec<String>,
    attr_index: HashMap<String, usize>,
    values: Vec<String>,
    value_index: HashMap<String, Value>,
    relations: Vec<Relation>,
}

impl QueryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn attribute(&mut self, name: &str) -> usize {
        if let Some(&a) = self.attr_index.get(name) {
            return a;
        }
        let a = self.attributes.len();
        self.attributes.push(name.to_string());
        self.attr_index.insert(name.to_string(), a);
        a
    }

    pub fn value(&mut self, name: &str) -> Value {
        if let Some(&v) = self.value_index.get(name) {
            return v;
        }
        let v = self.values.len() as Value;
        self.values.push(name.to_string());
        self.value_index.insert(name.to_string(), v);
        v
    }

    pub fn relation<R, S>(&mut self, name: &str, schema: &[&str], rows: R) -> Result<&mut Self>
    where
        R: IntoIterator<Item = Vec<S>>,
        S: AsRef<str>,
    {
        let schema: Vec<usize> = schema.iter().map(|a| self.attribute(a)).collect();
        let rows: Vec<Tuple> = rows.into_iter().map(|r| r.iter().map(|v| self.value(v.as_ref())).collect()).collect();
        self.relations.push(Relation::new(name, schema, rows)?);
        Ok(self)
    }

    pub fn build(self) -> Result<JoinQuery> {
        JoinQuery::new(self.attributes, self.relations, self.values)
    }
}

/// `deg_{Y|X}(R) ≤ N`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DegreeConstraint {
    pub x: AttrSet,
    pub y: AttrSet,
    pub n: u64,
}

impl DegreeConstraint {
    pub fn new(x: AttrSet, y: AttrSet, n: u64) -> Result<Self> {
        if !x.is_proper_subset(y) {
            return Err(Error::Schema(format!("constraint needs X ⊊ Y, got {x:?} and {y:?}")));
        }
        if n == 0 {
            return Err(Error::Schema("constraint bound must be at least 1".into()));
        }
        Ok(DegreeConstraint { x, y, n })
    }

    pub fn cardinality(y: AttrSet, n: u64) -> Self {
        DegreeConstraint { x: AttrSet::EMPTY, y, n }
    }

    /// Attributes bounded by this constraint: `Y − X`.
    pub fn bounded(&self) -> AttrSet {
        self.y.minus(self.x)
    }

    pub fn is_cardinality(&self) -> bool {
        self.x.is_empty()
    }
}

impl PartialOrd for DegreeConstraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DegreeConstraint {
    fn cmp(&self, o: &Self) -> Ordering {
        self.x.cmp_lex(o.x).then_with(|| self.y.cmp_lex(o.y)).then_with(|| self.n.cmp(&o.n))
    }
}

/// Validated, closed constraints in canonical order, each with its main guard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    pub constraints: Vec<DegreeConstraint>,
    /// Index of the main guard relation of each constraint.
    pub guards: Vec<usize>,
}

impl ConstraintSet {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Indices of the constraints with `a ∈ Y − X`, ascending.
    pub fn constraints_of_attribute(&self, a: usize) -> Vec<usize> {
        constraints_of_attribute(&self.constraints, a)
    }

    pub fn dependency_graph(&self, k: usize) -> DependencyGraph {
        DependencyGraph::new(&self.constraints, k)
    }
}

pub fn constraints_of_attribute(dc: &[DegreeConstraint], a: usize) -> Vec<usize> {
    (0..dc.len()).filter(|&i| dc[i].bounded().contains(a)).collect()
}

/// Adds one cardinality constraint per relation (with `N = max(|R|, 1)`),
/// keeps the smallest `N` per `(X, Y)`, picks the first relation (in query
/// order) that guards each constraint, and sorts canonically.
pub fn validate_and_close(q: &JoinQuery, declared: &[DegreeConstraint]) -> Result<ConstraintSet> {
    let k = q.num_attrs();
    let universe = AttrSet::full(k);
    let mut best: HashMap<(AttrSet, AttrSet), u64> = HashMap::new();
    let cardinalities = q.relations.iter().map(|r| DegreeConstraint::cardinality(r.attrs(), r.len().max(1) as u64));
    for c in declared.iter().copied().chain(cardinalities) {
        if !c.y.is_subset(universe) {
            return Err(Error::Schema(format!("constraint mentions attributes outside the query: {:?}", c.y)));
        }
        let c = DegreeConstraint::new(c.x, c.y, c.n)?;
        best.entry((c.x, c.y)).and_modify(|n| *n = (*n).min(c.n)).or_insert(c.n);
    }
    let mut constraints: Vec<DegreeConstraint> =
        best.into_iter().map(|((x, y), n)| DegreeConstraint { x, y, n }).collect();
    constraints.sort();

    let mut guards = Vec::with_capacity(constraints.len());
    for c in &constraints {
        let mut guard = None;
        for (ri, r) in q.relations.iter().enumerate() {
            if c.y.is_subset(r.attrs()) && r.degree(c.x, c.y)? <= c.n {
                guard = Some(ri);
                break;
            }
        }
        match guard {
            Some(g) => guards.push(g),
            None => {
                return Err(Error::UnguardedConstraint { x: q.attr_set_names(c.x), y: q.attr_set_names(c.y), n: c.n })
            }
        }
    }
    Ok(ConstraintSet { constraints, guards })
}

/// Edges `X → Y` for every `x ∈ X`, `y ∈ Y − X` of every constraint.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    pub succ: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    pub fn new(dc: &[DegreeConstraint], k: usize) -> Self {
        let mut succ = vec![BTreeSet::new(); k];
        for c in dc {
            for x in c.x.iter() {
                for y in c.bounded().iter() {
                    succ[x].insert(y);
                }
            }
        }
        DependencyGraph { succ }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ.iter().enumerate().flat_map(|(u, s)| s.iter().map(move |&v| (u, v))).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Kahn's algorithm, always taking the smallest ready id. On a cycle the
    /// error carries a witness `[a, b, ..., a]`.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let k = self.succ.len();
        let mut indeg = vec![0usize; k];
        for s in &self.succ {
            for &v in s {
                indeg[v] += 1;
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..k).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(k);
        while let Some(Reverse(u)) = heap.pop() {
            order.push(u);
            for &v in &self.succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(Reverse(v));
                }
            }
        }
        if order.len() == k {
            return Ok(order);
        }
        // Every remaining vertex has a remaining predecessor; walk backwards
        // until a vertex repeats.
        let remaining: Vec<bool> = (0..k).map(|v| indeg[v] > 0).collect();
        let start = (0..k).find(|&v| remaining[v]).expect("a remaining vertex");
        let mut walk = vec![start];
        let mut pos = HashMap::from([(start, 0usize)]);
        let mut cur = start;
        loop {
            let pred = (0..k)
                .find(|&u| remaining[u] && self.succ[u].contains(&cur))
                .expect("remaining vertex has a remaining predecessor");
            if let Some(&p) = pos.get(&pred) {
                let mut cycle: Vec<usize> = walk[p..].to_vec();
                cycle.push(pred);
                cycle.reverse();
                return Err(Error::CyclicConstraints { witness: cycle });
            }
            pos.insert(pred, walk.len());
            walk.push(pred);
            cur = pred;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(v: &[(&str, &str)]) -> Vec<Vec<String>> {
        v.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect()
    }

    #[test]
    fn degree_of_fan_out() {
        let mut b = QueryBuilder::new();
        b.relation("R", &["A", "B"], rows(&[("1", "a"), ("1", "b"), ("2", "a")])).unwrap();
        let q = b.build().unwrap();
        let r = &q.relations[0];
        let (a, bb) = (AttrSet::singleton(0), AttrSet::singleton(1));
        assert_eq!(r.degree(a, a.union(bb)).unwrap(), 2);
        assert_eq!(r.degree(AttrSet::EMPTY, a).unwrap(), 2);
        assert_eq!(r.degree(AttrSet::EMPTY, a.union(bb)).unwrap(), 3);
        assert!(r.degree(a, a).is_err());
    }

    #[test]
    fn duplicate_rows_are_dropped() {
        let r = Relation::new("R", vec![0, 1], vec![vec![1, 2], vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn unguarded_constraint_is_rejected() {
        let mut b = QueryBuilder::new();
        b.relation("R", &["A", "B"], rows(&[("1", "a"), ("1", "b")])).unwrap();
        let q = b.build().unwrap();
        let c = DegreeConstraint::new(AttrSet::singleton(0), AttrSet::from_ids([0, 1]), 1).unwrap();
        assert!(matches!(validate_and_close(&q, &[c]), Err(Error::UnguardedConstraint { .. })));
    }

    #[test]
    fn triangle_cycle_witness() {
        let ab = DegreeConstraint::new(AttrSet::singleton(0), AttrSet::from_ids([0, 1]), 2).unwrap();
        let bc = DegreeConstraint::new(AttrSet::singleton(1), AttrSet::from_ids([1, 2]), 2).unwrap();
        let ca = DegreeConstraint::new(AttrSet::singleton(2), AttrSet::from_ids([2, 0]), 2).unwrap();
        let g = DependencyGraph::new(&[ab, bc, ca], 3);
        match g.topological_order() {
            Err(Error::CyclicConstraints { witness }) => assert_eq!(witness, vec![0, 1, 2, 0]),
            other => panic!("expected a cycle, got {other:?}"),
        }
        let g = DependencyGraph::new(&[ab, bc], 3);
        assert_eq!(g.topological_order().unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_relation_gets_unit_cardinality() {
        let r = Relation::new("R", vec![0], vec![]).unwrap();
        let q = JoinQuery::new(vec!["A".into()], vec![r], vec![]).unwrap();
        let dc = validate_and_close(&q, &[]).unwrap();
        assert_eq!(dc.constraints, vec![DegreeConstraint::cardinality(AttrSet::singleton(0), 1)]);
    }

    fn arb_query() -> impl Strategy<Value = JoinQuery> {
        // Up to 4 relations over 4 attributes with small domains.
        let rel = (
            proptest::sample::subsequence(vec![0usize, 1, 2, 3], 1..=3),
            proptest::collection::vec(proptest::collection::vec(0u32..3, 3), 0..8),
        );
        proptest::collection::vec(rel, 1..4).prop_filter_map("cover", |rels| {
            let relations: Vec<Relation> = rels
                .into_iter()
                .enumerate()
                .map(|(i, (schema, rows))| {
                    let rows = rows.into_iter().map(|r| r[..schema.len()].to_vec()).collect();
                    Relation::new(format!("R{i}"), schema, rows).unwrap()
                })
                .collect();
            let used = relations.iter().fold(AttrSet::EMPTY, |s, r| s.union(r.attrs()));
            let k = used.iter().max().unwrap() + 1;
            if used != AttrSet::full(k) {
                return None;
            }
            let attributes = (0..k).map(|a| format!("A{a}")).collect();
            JoinQuery::new(attributes, relations, (0..3).map(|v| v.to_string()).collect()).ok()
        })
    }

    proptest! {
        #[test]
        fn closure_is_idempotent_and_guarded(q in arb_query()) {
            let dc = validate_and_close(&q, &[]).unwrap();
            let again = validate_and_close(&q, &dc.constraints).unwrap();
            prop_assert_eq!(&dc, &again);
            let mut sorted = dc.constraints.clone();
            sorted.sort();
            prop_assert_eq!(&sorted, &dc.constraints);
            for (c, &g) in dc.constraints.iter().zip(&dc.guards) {
                let r = &q.relations[g];
                prop_assert!(c.y.is_subset(r.attrs()));
                prop_assert!(r.degree(c.x, c.y).unwrap() <= c.n);
            }
        }
    }
}
