//! Undirected weighted graphs with strictly positive edge weights.
//!
//! Vertices are dense ids `0..n`. Edges are stored once with endpoints
//! normalized to `u < v` and sorted lexicographically, so two graphs built
//! from the same edge set compare equal and serialize identically.

use crate::error::{Error, Result};

/// How duplicate undirected edges in an input edge list are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupePolicy {
    /// Reject the input on the first duplicate.
    Error,
    /// Keep the first occurrence, drop the rest.
    KeepFirst,
    /// Sum the weights of all occurrences.
    Sum,
}

/// One undirected edge, normalized so that `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected graph with positive weights and dense vertex ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Build a graph from `(u, v, w)` triples; the node count is
    /// `1 + max id`. Errors on an empty edge list, self-loops, and
    /// non-positive or non-finite weights.
    pub fn from_edges(edges: &[(usize, usize, f64)], dedupe: DedupePolicy) -> Result<Self> {
        let n = edges
            .iter()
            .map(|&(u, v, _)| u.max(v) + 1)
            .max()
            .ok_or_else(|| Error::Graph("empty edge list".to_string()))?;
        Self::with_node_count(n, edges, dedupe)
    }

    /// Build a graph with an explicit node count (allows isolated vertices).
    pub fn with_node_count(
        n: usize,
        edges: &[(usize, usize, f64)],
        dedupe: DedupePolicy,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Graph("node count must be at least 1".to_string()));
        }
        let mut seen = std::collections::HashMap::new();
        let mut out: Vec<Edge> = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) exceeds node count {n}"
                )));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) has non-positive or non-finite weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            match seen.entry((u, v)) {
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(out.len());
                    out.push(Edge { u, v, w });
                }
                std::collections::hash_map::Entry::Occupied(slot) => match dedupe {
                    DedupePolicy::Error => return Err(Error::DuplicateEdge { u, v }),
                    DedupePolicy::KeepFirst => {}
                    DedupePolicy::Sum => out[*slot.get()].w += w,
                },
            }
        }
        out.sort_by_key(|e| (e.u, e.v));
        let mut adj = vec![Vec::new(); n];
        for e in &out {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(WeightedGraph { n, edges: out, adj })
    }

    /// Build an unweighted (all weights 1) graph from vertex pairs.
    pub fn unit(edges: &[(usize, usize)]) -> Result<Self> {
        let triples: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(&triples, DedupePolicy::Error)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted lexicographically with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `u` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    /// Weight of edge `(u, v)` if present.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adj
            .get(u)?
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// Sum of weights of edges incident to `u`.
    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum()
    }

    pub fn max_weighted_degree(&self) -> f64 {
        (0..self.n)
            .map(|u| self.weighted_degree(u))
            .fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = std::collections::VecDeque::from([start]);
            seen[start] = true;
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Extract the largest connected component, relabeling vertices to
    /// `0..n'` in increasing original-id order. Ties between equally large
    /// components go to the one containing the smallest vertex id. Also
    /// returns the old-id → new-id map (`None` for dropped vertices).
    pub fn largest_connected_component(&self) -> Result<(WeightedGraph, Vec<Option<usize>>)> {
        let comps = self.components();
        // components() lists components by smallest member, so the first
        // maximum realizes the smallest-id tie-break.
        let best = comps
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .ok_or_else(|| Error::Graph("empty graph".to_string()))?;
        let mut map = vec![None; self.n];
        for (new, &old) in best.iter().enumerate() {
            map[old] = Some(new);
        }
        let kept: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .filter_map(|e| match (map[e.u], map[e.v]) {
                (Some(u), Some(v)) => Some((u, v, e.w)),
                _ => None,
            })
            .collect();
        let sub = WeightedGraph::with_node_count(best.len(), &kept, DedupePolicy::Error)?;
        Ok((sub, map))
    }

    /// Multiply every edge weight by `a > 0`.
    pub fn scale_weights(&self, a: f64) -> Result<WeightedGraph> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Domain(format!(
                "scale factor must be positive and finite, got {a}"
            )));
        }
        let scaled: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, e.w * a)).collect();
        WeightedGraph::with_node_count(self.n, &scaled, DedupePolicy::Error)
    }

    /// Replace edge weights, keeping the topology. `weights` must align with
    /// [`edges`](Self::edges) order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<WeightedGraph> {
        if weights.len() != self.edges.len() {
            return Err(Error::Dimension {
                what: "weight vector",
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        let triples: Vec<_> = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| (e.u, e.v, w))
            .collect();
        WeightedGraph::with_node_count(self.n, &triples, DedupePolicy::Error)
    }
}
