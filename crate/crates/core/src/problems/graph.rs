use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Simple graph without self-loops. Undirected unless `directed` is set, in
/// which case each edge runs `u -> v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub n_nodes: usize,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<usize>,
}

impl Graph {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            edges: Vec::new(),
            directed: false,
            source: None,
            sink: None,
        }
    }

    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut g = Self::new(n_nodes);
        g.edges = edges
            .iter()
            .map(|&(u, v, weight)| Edge { u, v, weight })
            .collect();
        g
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.u >= self.n_nodes || e.v >= self.n_nodes {
                return Err(ProblemError::InvalidGraph(alloc::format!(
                    "edge {i} ({}, {}) references a node outside 0..{}",
                    e.u,
                    e.v,
                    self.n_nodes
                )));
            }
            if e.u == e.v {
                return Err(ProblemError::InvalidGraph(alloc::format!(
                    "edge {i} is a self-loop on node {}",
                    e.u
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(ProblemError::InvalidGraph(alloc::format!(
                    "edge {i} has non-positive weight {}",
                    e.weight
                )));
            }
        }
        for node in [self.source, self.sink].into_iter().flatten() {
            if node >= self.n_nodes {
                return Err(ProblemError::InvalidGraph(alloc::format!(
                    "terminal node {node} out of range"
                )));
            }
        }
        Ok(())
    }

    /// Symmetric weighted adjacency matrix, ignoring direction.
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n_nodes]; self.n_nodes];
        for e in &self.edges {
            a[e.u][e.v] += e.weight;
            a[e.v][e.u] += e.weight;
        }
        a
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
    }

    /// Distinct neighbours of `v`, ignoring direction.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.u == v {
                    Some(e.v)
                } else if e.v == v {
                    Some(e.u)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Indices of edges incident to `v`.
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].u == v || self.edges[i].v == v)
            .collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Copy with node `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let mut g = self.clone();
        for e in &mut g.edges {
            let (u, v) = (perm[e.u], perm[e.v]);
            if g.directed {
                (e.u, e.v) = (u, v);
            } else {
                (e.u, e.v) = (u.min(v), u.max(v));
            }
        }
        g.edges.sort_by_key(|e| (e.u, e.v));
        g.source = g.source.map(|s| perm[s]);
        g.sink = g.sink.map(|t| perm[t]);
        g
    }

    /// Orients every edge from lower to higher index and marks node 0 as the
    /// source and the last node as the sink.
    pub fn into_flow_network(mut self) -> Graph {
        for e in &mut self.edges {
            if e.u > e.v {
                core::mem::swap(&mut e.u, &mut e.v);
            }
        }
        self.directed = true;
        self.source = Some(0);
        self.sink = Some(self.n_nodes - 1);
        self
    }
}

/// Erdős–Rényi `G(n, p)`. Node pairs are visited in lexicographic order; an
/// included edge draws an integer weight in `1..=10` when `weighted`.
pub fn random_graph(n: usize, edge_prob: f64, weighted: bool, seed: u64) -> Result<Graph, ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParams(alloc::format!(
            "random graph needs at least 2 nodes, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(ProblemError::InvalidParams(alloc::format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = seeded(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < edge_prob {
                let weight = if weighted {
                    f64::from(rng.gen_range(1u32..=10))
                } else {
                    1.0
                };
                g.edges.push(Edge { u, v, weight });
            }
        }
    }
    Ok(g)
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded(seed));
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_at_p_one() {
        let g = random_graph(3, 1.0, false, 7).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(0, 2));
    }

    #[test]
    fn empty_at_p_zero() {
        let g = random_graph(4, 0.0, true, 1).unwrap();
        assert_eq!(g.n_nodes, 4);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = random_graph(8, 0.5, true, 42).unwrap();
        let b = random_graph(8, 0.5, true, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.edges.iter().all(|e| (1.0..=10.0).contains(&e.weight) && e.weight.fract() == 0.0));
        let c = random_graph(8, 0.5, true, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_inputs() {
        assert!(random_graph(1, 0.5, false, 0).is_err());
        assert!(random_graph(3, 1.5, false, 0).is_err());
        let g = Graph::from_edges(2, &[(0, 0, 1.0)]);
        assert!(g.validate().is_err());
    }

    #[test]
    fn relabel_preserves_structure() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)]);
        let h = g.relabeled(&[2, 0, 1]);
        assert!(h.has_edge(0, 2));
        assert_eq!(h.edges.len(), 1);
    }
}
