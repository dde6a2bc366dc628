//! Simple directed and undirected graphs, used both as data graphs and as
//! (constant-size) patterns, plus occurrence bookkeeping.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Vertex label interning for graphs read from text.
#[derive(Clone, Debug, Default)]
pub struct Labels {
    pub names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Labels {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn numbered(n: usize) -> Self {
        let mut l = Labels::default();
        for v in 0..n {
            l.intern(&v.to_string());
        }
        l
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }
}

#[derive(Clone, Debug)]
pub struct DiGraph {
    pub n: usize,
    /// Sorted, distinct, no self-loops.
    pub edges: Vec<(u32, u32)>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    pub labels: Labels,
}

impl DiGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        Self::with_labels(Labels::numbered(n), edges)
    }

    pub fn with_labels(labels: Labels, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let n = labels.names.len();
        let set: BTreeSet<(u32, u32)> = edges.into_iter().collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in &set {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop on vertex {}", labels.names[u as usize])));
            }
            out[u as usize].push(v);
            inc[v as usize].push(u);
        }
        Ok(DiGraph { n, edges: set.into_iter().collect(), out, inc, labels })
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out[v as usize]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.inc[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.out[u as usize].binary_search(&v).is_ok()
    }

    pub fn edge_index(&self, u: u32, v: u32) -> Option<usize> {
        self.edges.binary_search(&(u, v)).ok()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_weakly_connected(&self) -> bool {
        let adj: Vec<Vec<u32>> =
            (0..self.n).map(|v| self.out[v].iter().chain(&self.inc[v]).copied().collect()).collect();
        connected(self.n, &adj)
    }

    /// Reachability closure (patterns only; `O(n³)`).
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut r = vec![vec![false; n]; n];
        for (v, row) in r.iter_mut().enumerate() {
            row[v] = true;
        }
        for &(u, v) in &self.edges {
            r[u as usize][v as usize] = true;
        }
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    pub fn is_acyclic(&self) -> bool {
        let r = self.reachability();
        !self.edges.iter().any(|&(u, v)| r[v as usize][u as usize])
    }
}

#[derive(Clone, Debug)]
pub struct UGraph {
    pub n: usize,
    /// Sorted pairs `(u, v)` with `u < v`.
    pub edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
    pub labels: Labels,
}

impl UGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        Self::with_labels(Labels::numbered(n), edges)
    }

    pub fn with_labels(labels: Labels, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let n = labels.names.len();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop on vertex {}", labels.names[u as usize])));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(UGraph { n, edges: set.into_iter().collect(), adj, labels })
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        connected(self.n, &self.adj)
    }

    /// Both orientations of every edge.
    pub fn to_directed(&self) -> DiGraph {
        let edges = self.edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]);
        DiGraph::with_labels(self.labels.clone(), edges).expect("valid undirected graph")
    }

    /// The subgraph on `vertices` (renumbered in the given order).
    pub fn induced(&self, vertices: &[usize]) -> UGraph {
        let pos: HashMap<usize, u32> = vertices.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let edges = self.edges.iter().filter_map(|&(u, v)| Some((*pos.get(&(u as usize))?, *pos.get(&(v as usize))?)));
        UGraph::new(vertices.len(), edges).expect("subgraph of a valid graph")
    }
}

/// Collapses a directed graph with both orientations back to undirected.
pub fn to_undirected(g: &DiGraph) -> UGraph {
    UGraph::with_labels(g.labels.clone(), g.edges.iter().copied()).expect("valid directed graph")
}

fn connected(n: usize, adj: &[Vec<u32>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
                stack.push(v as usize);
            }
        }
    }
    count == n
}

/// Calls `f` on every permutation of `0..k` in lexicographic order.
pub fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        f(&p);
        // Next lexicographic permutation.
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else { return };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Number of vertex permutations preserving the edge set.
pub fn automorphism_count_directed(p: &DiGraph) -> usize {
    let mut c = 0;
    for_each_permutation(p.n, |perm| {
        if p.edges.iter().all(|&(u, v)| p.has_edge(perm[u as usize] as u32, perm[v as usize] as u32)) {
            c += 1;
        }
    });
    c
}

pub fn automorphisms_undirected(p: &UGraph) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_permutation(p.n, |perm| {
        if p.edges.iter().all(|&(u, v)| p.has_edge(perm[u as usize] as u32, perm[v as usize] as u32)) {
            out.push(perm.to_vec());
        }
    });
    out
}

/// An injective map from pattern vertices to data vertices under which every
/// pattern edge is a data edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub map: Vec<u32>,
}

impl Occurrence {
    pub fn is_injective(&self) -> bool {
        crate::sampler::all_distinct(&self.map)
    }

    /// Sorted image edge set; two maps describe the same occurrence iff
    /// their image edge sets agree.
    pub fn key_directed(&self, p: &DiGraph) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> =
            p.edges.iter().map(|&(u, v)| (self.map[u as usize], self.map[v as usize])).collect();
        e.sort_unstable();
        e
    }

    pub fn key_undirected(&self, p: &UGraph) -> Vec<(u32, u32)> {
        let mut e: Vec<(u32, u32)> = p
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.map[u as usize], self.map[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect();
        e.sort_unstable();
        e
    }

    pub fn is_valid_directed(&self, g: &DiGraph, p: &DiGraph) -> bool {
        self.map.len() == p.n
            && self.is_injective()
            && p.edges.iter().all(|&(u, v)| g.has_edge(self.map[u as usize], self.map[v as usize]))
    }

    pub fn is_valid_undirected(&self, g: &UGraph, p: &UGraph) -> bool {
        self.map.len() == p.n
            && self.is_injective()
            && p.edges.iter().all(|&(u, v)| g.has_edge(self.map[u as usize], self.map[v as usize]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn automorphisms_of_small_patterns() {
        let cycle = DiGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(automorphism_count_directed(&cycle), 3);
        let path = DiGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(automorphism_count_directed(&path), 1);
        let tri = UGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(automorphisms_undirected(&tri).len(), 6);
    }

    #[test]
    fn permutations_are_complete() {
        let mut n = 0;
        for_each_permutation(4, |_| n += 1);
        assert_eq!(n, 24);
    }

    #[test]
    fn directed_round_trip() {
        let tri = UGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = tri.to_directed();
        assert_eq!(d.edges.len(), 6);
        assert_eq!(to_undirected(&d).edges, tri.edges);
        assert!(!d.is_acyclic());
    }

    #[test]
    fn self_loops_are_rejected() {
        assert!(DiGraph::new(2, [(1, 1)]).is_err());
        assert!(UGraph::new(2, [(0, 0)]).is_err());
    }
}
