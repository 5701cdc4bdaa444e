use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Largest node count for which consistent orderings are enumerated.
pub const MAX_ORDERING_FEATURES: usize = 8;

/// Directed acyclic graph over feature indices `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDag {
    m: usize,
    edges: BTreeSet<(usize, usize)>,
    topo: Vec<usize>,
}

impl CausalDag {
    /// Builds a DAG from `(parent, child)` pairs; fails on out-of-range
    /// nodes, self-loops and cycles.
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::argument("DAG needs at least one node"));
        }
        let edges: BTreeSet<_> = edges.into_iter().collect();
        for &(p, c) in &edges {
            if p >= m || c >= m {
                return Err(Error::argument(format!("edge ({p}, {c}) out of range for {m} nodes")));
            }
            if p == c {
                return Err(Error::argument(format!("self-loop on node {p}")));
            }
        }
        let topo = kahn(m, &edges).ok_or_else(|| Error::argument("graph contains a cycle"))?;
        Ok(CausalDag { m, edges, topo })
    }

    pub fn empty(m: usize) -> Result<Self> {
        Self::new(m, [])
    }

    /// `0 → 1 → ... → m-1`.
    pub fn chain(m: usize) -> Result<Self> {
        Self::new(m, (1..m).map(|c| (c - 1, c)))
    }

    /// `m-1 → ... → 1 → 0`.
    pub fn reverse_chain(m: usize) -> Result<Self> {
        Self::new(m, (1..m).map(|c| (c, c - 1)))
    }

    /// `root → every other node`.
    pub fn fork(m: usize, root: usize) -> Result<Self> {
        Self::new(m, (0..m).filter(|&c| c != root).map(|c| (root, c)))
    }

    pub fn num_nodes(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn parents(&self, child: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == child).map(|e| e.0)
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.edges.contains(&(parent, child))
    }

    /// One topological order (smallest available node first).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Every permutation of the nodes that respects all edges, in
    /// lexicographic order. For the empty graph this is all `m!` orderings.
    pub fn consistent_orderings(&self) -> Result<Vec<Vec<usize>>> {
        if self.m > MAX_ORDERING_FEATURES {
            return Err(Error::Capacity {
                what: "nodes for ordering enumeration",
                actual: self.m,
                limit: MAX_ORDERING_FEATURES,
            });
        }
        let mut parents_mask = vec![0u32; self.m];
        for &(p, c) in &self.edges {
            parents_mask[c] |= 1 << p;
        }
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(self.m);
        extend(&parents_mask, 0, &mut prefix, &mut out);
        Ok(out)
    }
}

fn extend(parents: &[u32], placed: u32, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let m = parents.len();
    if prefix.len() == m {
        out.push(prefix.clone());
        return;
    }
    for j in 0..m {
        let bit = 1u32 << j;
        if placed & bit == 0 && parents[j] & !placed == 0 {
            prefix.push(j);
            extend(parents, placed | bit, prefix, out);
            prefix.pop();
        }
    }
}

fn kahn(m: usize, edges: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; m];
    for &(_, c) in edges {
        indeg[c] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..m).filter(|&j| indeg[j] == 0).collect();
    let mut order = Vec::with_capacity(m);
    while let Some(j) = ready.pop_first() {
        order.push(j);
        for &(_, c) in edges.iter().filter(|e| e.0 == j) {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == m).then_some(order)
}
