//! Graph-theoretic validity checks for decoded assignments, plus small
//! exhaustive existence tests used to decide whether a check applies.

use alloc::vec;
use alloc::vec::Vec;

use super::Graph;

pub fn is_vertex_cover(g: &Graph, chosen: &[bool]) -> bool {
    g.edges.iter().all(|e| chosen[e.u] || chosen[e.v])
}

pub fn is_edge_cover(g: &Graph, chosen_edges: &[bool]) -> bool {
    (0..g.n_nodes).all(|v| g.incident_edges(v).iter().any(|&e| chosen_edges[e]))
}

pub fn is_clique(g: &Graph, chosen: &[bool], k: usize) -> bool {
    let nodes: Vec<usize> = (0..g.n_nodes).filter(|&v| chosen[v]).collect();
    nodes.len() == k
        && nodes
            .iter()
            .enumerate()
            .all(|(i, &u)| nodes[i + 1..].iter().all(|&v| g.has_edge(u, v)))
}

pub fn has_clique(g: &Graph, k: usize) -> bool {
    let n = g.n_nodes;
    (0u64..(1 << n)).any(|m| {
        m.count_ones() as usize == k && is_clique(g, &super::super::hamiltonian::decode_assignment(m as usize, n), k)
    })
}

/// Decodes one-hot `x_{v,c}` (index `v * colors + c`) into a color per node.
pub fn decode_one_hot(x: &[bool], groups: usize, width: usize) -> Option<Vec<usize>> {
    (0..groups)
        .map(|v| {
            let row = &x[v * width..(v + 1) * width];
            let mut hot = row.iter().enumerate().filter(|(_, b)| **b).map(|(c, _)| c);
            match (hot.next(), hot.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        })
        .collect()
}

pub fn is_proper_coloring(g: &Graph, x: &[bool], colors: usize) -> bool {
    match decode_one_hot(x, g.n_nodes, colors) {
        Some(col) => g.edges.iter().all(|e| col[e.u] != col[e.v]),
        None => false,
    }
}

pub fn colorable(g: &Graph, colors: usize) -> bool {
    let n = g.n_nodes;
    let mut col = vec![0usize; n];
    fn go(g: &Graph, v: usize, colors: usize, col: &mut [usize]) -> bool {
        if v == g.n_nodes {
            return true;
        }
        for c in 0..colors {
            if g.neighbors(v).iter().all(|&u| u >= v || col[u] != c) {
                col[v] = c;
                if go(g, v + 1, colors, col) {
                    return true;
                }
            }
        }
        false
    }
    go(g, 0, colors, &mut col)
}

pub fn is_matching(g: &Graph, chosen_edges: &[bool]) -> bool {
    let mut used = vec![false; g.n_nodes];
    for (i, e) in g.edges.iter().enumerate() {
        if chosen_edges[i] {
            if used[e.u] || used[e.v] {
                return false;
            }
            used[e.u] = true;
            used[e.v] = true;
        }
    }
    true
}

/// A matching to which no further edge can be added.
pub fn is_maximal_matching(g: &Graph, chosen_edges: &[bool]) -> bool {
    if !is_matching(g, chosen_edges) {
        return false;
    }
    let mut used = vec![false; g.n_nodes];
    for (i, e) in g.edges.iter().enumerate() {
        if chosen_edges[i] {
            used[e.u] = true;
            used[e.v] = true;
        }
    }
    g.edges.iter().all(|e| used[e.u] || used[e.v])
}

/// `x_{v,i}` (index `v * n + i`) is a bijection mapping edges onto edges.
pub fn is_isomorphism(g1: &Graph, g2: &Graph, x: &[bool]) -> bool {
    let n = g1.n_nodes;
    let Some(f) = decode_one_hot(x, n, n) else {
        return false;
    };
    let mut hit = vec![false; n];
    for &i in &f {
        if hit[i] {
            return false;
        }
        hit[i] = true;
    }
    (0..n).all(|u| ((u + 1)..n).all(|v| g1.has_edge(u, v) == g2.has_edge(f[u], f[v])))
}

/// `x_{v,j}` (index `v * n + j`) is a permutation whose consecutive cities,
/// cyclically, are all adjacent.
pub fn is_hamiltonian_cycle(g: &Graph, x: &[bool]) -> bool {
    let n = g.n_nodes;
    let Some(pos) = decode_one_hot(x, n, n) else {
        return false;
    };
    let mut order = vec![usize::MAX; n];
    for (v, &j) in pos.iter().enumerate() {
        if order[j] != usize::MAX {
            return false;
        }
        order[j] = v;
    }
    (0..n).all(|j| g.has_edge(order[j], order[(j + 1) % n]))
}
