//! Decodes a minimizing assignment and checks it against the graph problem it
//! encodes. Existence questions (is there a k-clique, a proper coloring, a
//! Hamiltonian cycle) are settled by exhaustive search first.

use std::collections::VecDeque;

use qverify_core::hamiltonian::decode_assignment;
use qverify_core::problems::check::{
    colorable, decode_one_hot, has_clique, is_clique, is_edge_cover, is_hamiltonian_cycle, is_isomorphism,
    is_maximal_matching, is_proper_coloring, is_vertex_cover,
};
use qverify_core::problems::{Graph, ProblemInstance, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// The instance has no feasible solution of the required shape.
    NotApplicable,
}

fn ensure(ok: bool, what: &str) -> Result<Verdict, String> {
    if ok {
        Ok(Verdict::Valid)
    } else {
        Err(what.to_string())
    }
}

fn weight(g: &Graph, u: usize, v: usize) -> Option<f64> {
    g.edges
        .iter()
        .find(|e| (e.u, e.v) == (u, v) || (!g.directed && (e.v, e.u) == (u, v)))
        .map(|e| e.weight)
}

fn component(g: &Graph, start: usize) -> Vec<bool> {
    let mut seen = vec![false; g.n_nodes];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for e in &g.edges {
            let next = if e.u == v {
                e.v
            } else if e.v == v {
                e.u
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Edmonds-Karp on the directed capacity graph.
pub fn max_flow_value(g: &Graph, s: usize, t: usize) -> f64 {
    let n = g.n_nodes;
    let mut cap = vec![vec![0.0f64; n]; n];
    for e in &g.edges {
        cap[e.u][e.v] += e.weight;
    }
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0.0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Cheapest Hamiltonian cycle weight, if any cycle exists.
pub fn best_tour(g: &Graph) -> Option<f64> {
    let n = g.n_nodes;
    permutations(n)
        .into_iter()
        .filter_map(|order| (0..n).map(|j| weight(g, order[j], order[(j + 1) % n])).sum::<Option<f64>>())
        .reduce(f64::min)
}

/// Capacity bit weights: powers of two with the last one trimmed so the bits
/// sum to exactly `capacity`.
fn capacity_weights(capacity: u64) -> Vec<u64> {
    let mut bits = 0;
    while (1u64 << bits) <= capacity {
        bits += 1;
    }
    let mut w: Vec<u64> = (0..bits - 1).map(|k| 1 << k).collect();
    w.push(capacity - w.iter().sum::<u64>());
    w
}

pub fn check(instance: &ProblemInstance, assignment: u64) -> Result<Verdict, String> {
    let g = &instance.graph;
    let x = decode_assignment(assignment as usize, instance.n_vars());
    match instance.kind {
        ProblemKind::ConnectedComponent => {
            let fixed = instance.params.fixed_node.unwrap_or(0);
            let mut chosen = Vec::with_capacity(g.n_nodes);
            let mut it = x.iter();
            for v in 0..g.n_nodes {
                chosen.push(v == fixed || *it.next().expect("one variable per free node"));
            }
            ensure(chosen == component(g, fixed), "selection is not the pinned node's component")
        }
        ProblemKind::CommunityDetection => {
            let k = instance.params.communities.unwrap_or(2);
            ensure(decode_one_hot(&x, g.n_nodes, k).is_some(), "community assignment is not one-hot")
        }
        ProblemKind::KClique => {
            let k = instance.params.k.expect("resolved");
            if !has_clique(g, k) {
                return Ok(Verdict::NotApplicable);
            }
            ensure(is_clique(g, &x, k), "selection is not a k-clique")
        }
        ProblemKind::GraphIsomorphism => {
            let g2 = instance.graph2.as_ref().expect("second graph");
            ensure(is_isomorphism(g, g2, &x), "mapping is not an isomorphism")
        }
        ProblemKind::GraphColoring => {
            let colors = instance.params.n_colors.expect("resolved");
            if !colorable(g, colors) {
                return Ok(Verdict::NotApplicable);
            }
            ensure(is_proper_coloring(g, &x, colors), "not a proper coloring")
        }
        ProblemKind::Tsp => {
            let Some(best) = best_tour(g) else {
                return Ok(Verdict::NotApplicable);
            };
            if !is_hamiltonian_cycle(g, &x) {
                return Err("not a Hamiltonian cycle".into());
            }
            let n = g.n_nodes;
            let pos = decode_one_hot(&x, n, n).expect("checked");
            let mut order = vec![0; n];
            for (v, &j) in pos.iter().enumerate() {
                order[j] = v;
            }
            let len: f64 = (0..n).map(|j| weight(g, order[j], order[(j + 1) % n]).unwrap()).sum();
            ensure((len - best).abs() < 1e-9, "tour is not the shortest")
        }
        ProblemKind::MinMaximalMatching => ensure(is_maximal_matching(g, &x), "not a maximal matching"),
        ProblemKind::VertexCover => ensure(is_vertex_cover(g, &x), "not a vertex cover"),
        ProblemKind::EdgeCover => {
            let isolated = (0..g.n_nodes).any(|v| g.incident_edges(v).is_empty());
            if isolated {
                let covered = (0..g.n_nodes)
                    .filter(|&v| !g.incident_edges(v).is_empty())
                    .all(|v| g.incident_edges(v).iter().any(|&e| x[e]));
                return ensure(covered, "a non-isolated node is uncovered");
            }
            ensure(is_edge_cover(g, &x), "not an edge cover")
        }
        ProblemKind::MaxFlow => {
            let (s, t) = (g.source.unwrap(), g.sink.unwrap());
            let mut flow = Vec::with_capacity(g.edges.len());
            let mut k = 0;
            for e in &g.edges {
                let mut f = 0u64;
                for w in capacity_weights(e.weight as u64) {
                    if x[k] {
                        f += w;
                    }
                    k += 1;
                }
                flow.push(f as f64);
            }
            if k != x.len() {
                return Err(format!("layout has {k} bits, instance has {}", x.len()));
            }
            for v in (0..g.n_nodes).filter(|&v| v != s && v != t) {
                let net: f64 = g
                    .edges
                    .iter()
                    .zip(&flow)
                    .map(|(e, f)| if e.u == v { *f } else if e.v == v { -*f } else { 0.0 })
                    .sum();
                if net != 0.0 {
                    return Err(format!("flow not conserved at node {v}"));
                }
            }
            let value: f64 = g.edges.iter().zip(&flow).filter(|(e, _)| e.v == t).map(|(_, f)| f).sum();
            ensure(value == max_flow_value(g, s, t), "flow value is not maximum")
        }
        ProblemKind::MinCut => {
            let (s, t) = (g.source.unwrap(), g.sink.unwrap());
            if !x[s] || x[t] {
                return Err("source and sink on the wrong sides".into());
            }
            let cut: f64 = g.edges.iter().filter(|e| x[e.u] && !x[e.v]).map(|e| e.weight).sum();
            ensure(cut == max_flow_value(g, s, t), "cut is not minimum")
        }
    }
}

/// Node counts whose random instances stay near `max_vars` variables.
pub fn node_range(kind: ProblemKind) -> std::ops::RangeInclusive<usize> {
    match kind {
        ProblemKind::GraphIsomorphism | ProblemKind::GraphColoring | ProblemKind::Tsp => 3..=3,
        ProblemKind::CommunityDetection | ProblemKind::EdgeCover | ProblemKind::MaxFlow => 3..=5,
        // Penalty |V| + 1 only dominates weights up to 10 from five nodes on.
        ProblemKind::MinMaximalMatching => 5..=5,
        _ => 3..=8,
    }
}

/// The first `count` seeded random instances of `kind` that build and have at
/// most `max_vars` variables, cycling node counts over [`node_range`].
/// Also returns how many candidates were skipped.
pub fn small_instances(kind: ProblemKind, count: usize, max_vars: usize, seed0: u64) -> (Vec<ProblemInstance>, usize) {
    let sizes: Vec<usize> = node_range(kind).collect();
    let mut out = Vec::with_capacity(count);
    let mut skipped = 0;
    let mut seed = seed0;
    while out.len() < count {
        let n = sizes[(seed - seed0) as usize % sizes.len()];
        match qverify_core::problems::random_instance(kind, n, seed) {
            Ok(inst) if inst.n_vars() <= max_vars => out.push(inst),
            _ => skipped += 1,
        }
        seed += 1;
        assert!(skipped < 100 * count.max(1), "no usable {kind} instances");
    }
    (out, skipped)
}
