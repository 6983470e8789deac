use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{invalid, label, penalty, Graph, ProblemError, ProblemInstance, ProblemKind, ProblemParams};
use crate::hamiltonian::PseudoBooleanPolynomial as Poly;

pub(super) fn build(
    kind: ProblemKind,
    graph: &Graph,
    graph2: Option<&Graph>,
    params: &ProblemParams,
) -> Result<ProblemInstance, ProblemError> {
    let mut resolved = params.clone();
    let (poly, var_doc) = match kind {
        ProblemKind::ConnectedComponent => connected_component(graph, &mut resolved)?,
        ProblemKind::CommunityDetection => community_detection(graph, &mut resolved)?,
        ProblemKind::KClique => k_clique(graph, &mut resolved)?,
        ProblemKind::GraphIsomorphism => {
            let g2 = graph2.ok_or_else(|| invalid("graph isomorphism needs a second graph"))?;
            g2.validate()?;
            graph_isomorphism(graph, g2, &mut resolved)?
        }
        ProblemKind::GraphColoring => graph_coloring(graph, &mut resolved)?,
        ProblemKind::Tsp => tsp(graph, &mut resolved)?,
        ProblemKind::MinMaximalMatching => min_maximal_matching(graph, &mut resolved)?,
        ProblemKind::VertexCover => vertex_cover(graph, &mut resolved)?,
        ProblemKind::EdgeCover => edge_cover(graph, &mut resolved)?,
        ProblemKind::MaxFlow => max_flow(graph, &mut resolved)?,
        ProblemKind::MinCut => min_cut(graph, &mut resolved)?,
    };
    debug_assert_eq!(poly.n_vars, var_doc.len());
    Ok(ProblemInstance {
        kind,
        graph: graph.clone(),
        graph2: graph2.filter(|_| kind == ProblemKind::GraphIsomorphism).cloned(),
        params: resolved,
        poly,
        var_doc,
    })
}

type Built = Result<(Poly, Vec<String>), ProblemError>;

fn positive(name: &str, v: f64) -> Result<f64, ProblemError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(penalty(format!("{name} must be positive, got {v}")))
    }
}

fn var(n: usize, i: usize) -> Poly {
    Poly::linear(n, 0.0, &[(i, 1.0)])
}

/// `offset + Σ coeff · x_i` as a polynomial over `n` variables.
fn lin(n: usize, offset: f64, coeffs: &[(usize, f64)]) -> Poly {
    Poly::linear(n, offset, coeffs)
}

fn connected_component(g: &Graph, p: &mut ProblemParams) -> Built {
    let fixed = p.fixed_node.unwrap_or(0);
    if fixed >= g.n_nodes {
        return Err(invalid(format!("fixed node {fixed} out of range")));
    }
    if g.n_nodes < 2 {
        return Err(invalid("connected component needs at least 2 nodes"));
    }
    // With A >= |V| any violated adjacency term outweighs the largest component.
    let a = positive("A", p.penalty_a.unwrap_or(g.n_nodes as f64))?;
    p.fixed_node = Some(fixed);
    p.penalty_a = Some(a);
    let n = g.n_nodes - 1;
    // Variables skip the pinned node; x_fixed is the constant 1.
    let index = |v: usize| if v < fixed { v } else { v - 1 };
    let x = |v: usize| {
        if v == fixed {
            Poly::constant(n, 1.0)
        } else {
            var(n, index(v))
        }
    };
    let mut poly = Poly::new(n);
    for v in 0..g.n_nodes {
        let nb = g.neighbors(v);
        let mut term = x(v).scaled(nb.len() as f64);
        for u in nb {
            term.add_scaled(&x(u), -1.0);
        }
        poly.add_scaled(&term.square(), a);
        poly.add_scaled(&x(v), 1.0);
    }
    let doc = (0..g.n_nodes)
        .filter(|&v| v != fixed)
        .map(|v| label("x", &[v]))
        .collect();
    Ok((poly, doc))
}

fn community_detection(g: &Graph, p: &mut ProblemParams) -> Built {
    let k = p.communities.unwrap_or(2);
    if k < 1 {
        return Err(invalid("need at least one community"));
    }
    let big_p = positive("community one-hot penalty P", p.penalty_a.unwrap_or(2.0))?;
    p.communities = Some(k);
    p.penalty_a = Some(big_p);

    let n_nodes = g.n_nodes;
    let a = g.adjacency();
    let d: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    // Σ_ij A_ij = 2m with m the total edge weight.
    let two_m: f64 = d.iter().sum();
    if two_m <= 0.0 {
        return Err(invalid("community detection needs at least one edge"));
    }
    let n = n_nodes * k;
    let x = |v: usize, c: usize| v * k + c;
    let mut poly = Poly::new(n);
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            let b_ij = a[i][j] - d[i] * d[j] / two_m;
            if b_ij == 0.0 {
                continue;
            }
            for c in 0..k {
                poly.add_term(&[x(i, c), x(j, c)], -b_ij / two_m);
            }
        }
    }
    for i in 0..n_nodes {
        let coeffs: Vec<(usize, f64)> = (0..k).map(|c| (x(i, c), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), big_p);
    }
    let mut doc = Vec::with_capacity(n);
    for v in 0..n_nodes {
        for c in 0..k {
            doc.push(label("x", &[v, c]));
        }
    }
    Ok((poly, doc))
}

fn k_clique(g: &Graph, p: &mut ProblemParams) -> Built {
    let k = p.k.unwrap_or_else(|| g.n_nodes.min(3));
    if k == 0 || k > g.n_nodes {
        return Err(invalid(format!("clique size {k} must be in 1..={}", g.n_nodes)));
    }
    let b = positive("B", p.penalty_b.unwrap_or(1.0))?;
    let a = positive("A", p.penalty_a.unwrap_or(k as f64 * b + 1.0))?;
    if a <= k as f64 * b {
        return Err(penalty(format!("A = {a} must exceed k·B = {}", k as f64 * b)));
    }
    p.k = Some(k);
    p.penalty_a = Some(a);
    p.penalty_b = Some(b);

    let n = g.n_nodes;
    let mut poly = Poly::new(n);
    let all: Vec<(usize, f64)> = (0..n).map(|v| (v, -1.0)).collect();
    poly.add_scaled(&lin(n, k as f64, &all).square(), a);
    let mut edges = Poly::constant(n, (k * (k - 1)) as f64 / 2.0);
    for e in &g.edges {
        edges.add_term(&[e.u, e.v], -1.0);
    }
    poly.add_scaled(&edges.square(), b);
    Ok((poly, (0..n).map(|v| label("x", &[v])).collect()))
}

fn graph_isomorphism(g1: &Graph, g2: &Graph, p: &mut ProblemParams) -> Built {
    if g1.n_nodes != g2.n_nodes {
        return Err(invalid(format!(
            "isomorphism needs equal node counts, got {} and {}",
            g1.n_nodes, g2.n_nodes
        )));
    }
    let a = positive("A", p.penalty_a.unwrap_or(1.0))?;
    let b = positive("B", p.penalty_b.unwrap_or(1.0))?;
    p.penalty_a = Some(a);
    p.penalty_b = Some(b);

    let m = g1.n_nodes;
    let n = m * m;
    // x_{v,i}: node v of the first graph maps to node i of the second.
    let x = |v: usize, i: usize| v * m + i;
    let mut poly = Poly::new(n);
    for v in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..m).map(|i| (x(v, i), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    for i in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..m).map(|v| (x(v, i), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    // A pair mapped onto a pair with different adjacency costs B.
    for u in 0..m {
        for v in (u + 1)..m {
            let e1 = g1.has_edge(u, v);
            for i in 0..m {
                for j in 0..m {
                    if i != j && e1 != g2.has_edge(i, j) {
                        poly.add_term(&[x(u, i), x(v, j)], b);
                    }
                }
            }
        }
    }
    let mut doc = Vec::with_capacity(n);
    for v in 0..m {
        for i in 0..m {
            doc.push(label("x", &[v, i]));
        }
    }
    Ok((poly, doc))
}

fn graph_coloring(g: &Graph, p: &mut ProblemParams) -> Built {
    let colors = p.n_colors.unwrap_or(3);
    if colors < 1 {
        return Err(invalid("need at least one color"));
    }
    let a = positive("A", p.penalty_a.unwrap_or(1.0))?;
    let b = positive("B", p.penalty_b.unwrap_or(1.0))?;
    p.n_colors = Some(colors);
    p.penalty_a = Some(a);
    p.penalty_b = Some(b);

    let n = g.n_nodes * colors;
    let x = |v: usize, c: usize| v * colors + c;
    let mut poly = Poly::new(n);
    for v in 0..g.n_nodes {
        let coeffs: Vec<(usize, f64)> = (0..colors).map(|c| (x(v, c), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    for e in &g.edges {
        for c in 0..colors {
            poly.add_term(&[x(e.u, c), x(e.v, c)], b);
        }
    }
    let mut doc = Vec::with_capacity(n);
    for v in 0..g.n_nodes {
        for c in 0..colors {
            doc.push(label("x", &[v, c]));
        }
    }
    Ok((poly, doc))
}

fn tsp(g: &Graph, p: &mut ProblemParams) -> Built {
    let m = g.n_nodes;
    if m < 2 {
        return Err(invalid("tsp needs at least 2 nodes"));
    }
    let b = positive("B", p.penalty_b.unwrap_or(1.0))?;
    let max_w = g.max_weight().max(1.0);
    let a = positive("A", p.penalty_a.unwrap_or(b * max_w * m as f64 + 1.0))?;
    if b * max_w >= a {
        return Err(penalty(format!("need B·max w = {} < A = {a}", b * max_w)));
    }
    p.penalty_a = Some(a);
    p.penalty_b = Some(b);

    let n = m * m;
    // x_{v,j}: city v is visited at position j of the cycle.
    let x = |v: usize, j: usize| v * m + j;
    let mut poly = Poly::new(n);
    for v in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..m).map(|j| (x(v, j), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    for j in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..m).map(|v| (x(v, j), -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    let mut weight = vec![vec![None; m]; m];
    for e in &g.edges {
        weight[e.u][e.v] = Some(e.weight);
        if !g.directed {
            weight[e.v][e.u] = Some(e.weight);
        }
    }
    for (u, row) in weight.iter().enumerate() {
        for (v, w) in row.iter().enumerate() {
            if u == v {
                continue;
            }
            let coeff = match *w {
                Some(w) => b * w,
                None => a,
            };
            for j in 0..m {
                poly.add_term(&[x(u, j), x(v, (j + 1) % m)], coeff);
            }
        }
    }
    let mut doc = Vec::with_capacity(n);
    for v in 0..m {
        for j in 0..m {
            doc.push(label("x", &[v, j]));
        }
    }
    Ok((poly, doc))
}

fn min_maximal_matching(g: &Graph, p: &mut ProblemParams) -> Built {
    let a = (g.n_nodes + 1) as f64;
    if let Some(given) = p.penalty_a {
        if given != a {
            return Err(penalty(format!("matching penalty is fixed at |V| + 1 = {a}, got {given}")));
        }
    }
    p.penalty_a = Some(a);
    let n = g.edges.len();
    if n == 0 {
        return Err(invalid("matching needs at least one edge"));
    }
    let mut poly = Poly::new(n);
    for v in 0..g.n_nodes {
        let coeffs: Vec<(usize, f64)> = g.incident_edges(v).into_iter().map(|e| (e, -1.0)).collect();
        poly.add_scaled(&lin(n, 1.0, &coeffs).square(), a);
    }
    for (i, e) in g.edges.iter().enumerate() {
        poly.add_term(&[i], e.weight);
    }
    Ok((poly, edge_doc(g)))
}

fn edge_doc(g: &Graph) -> Vec<String> {
    g.edges
        .iter()
        .map(|e| format!("x_{{{}-{}}}", e.u, e.v))
        .collect()
}

fn cover_penalties(p: &mut ProblemParams) -> Result<(f64, f64), ProblemError> {
    let a = positive("A", p.penalty_a.unwrap_or(2.0))?;
    let b = positive("B", p.penalty_b.unwrap_or(1.0))?;
    if b >= a {
        return Err(penalty(format!("need B = {b} < A = {a}")));
    }
    p.penalty_a = Some(a);
    p.penalty_b = Some(b);
    Ok((a, b))
}

fn vertex_cover(g: &Graph, p: &mut ProblemParams) -> Built {
    let (a, b) = cover_penalties(p)?;
    let n = g.n_nodes;
    let mut poly = Poly::new(n);
    for e in &g.edges {
        let left = lin(n, 1.0, &[(e.u, -1.0)]);
        let right = lin(n, 1.0, &[(e.v, -1.0)]);
        poly.add_scaled(&left.product(&right), a);
    }
    for v in 0..n {
        poly.add_term(&[v], b);
    }
    Ok((poly, (0..n).map(|v| label("x", &[v])).collect()))
}

fn edge_cover(g: &Graph, p: &mut ProblemParams) -> Built {
    let (a, b) = cover_penalties(p)?;
    let n = g.edges.len();
    if n == 0 {
        return Err(invalid("edge cover needs at least one edge"));
    }
    let mut poly = Poly::new(n);
    for v in 0..g.n_nodes {
        let mut uncovered = Poly::constant(n, 1.0);
        for e in g.incident_edges(v) {
            uncovered = uncovered.product(&lin(n, 1.0, &[(e, -1.0)]));
        }
        poly.add_scaled(&uncovered, a);
    }
    for e in 0..n {
        poly.add_term(&[e], b);
    }
    Ok((poly, edge_doc(g)))
}

fn terminals(g: &Graph) -> Result<(usize, usize), ProblemError> {
    match (g.source, g.sink) {
        (Some(s), Some(t)) if s != t => Ok((s, t)),
        (Some(_), Some(_)) => Err(invalid("source and sink must differ")),
        _ => Err(invalid("flow problems need a source and a sink")),
    }
}

/// Bit weights for an integer in `0..=capacity`: powers of two, with the last
/// weight trimmed so the maximum representable value is exactly `capacity`.
pub(crate) fn capacity_bits(capacity: u64) -> Vec<u64> {
    let bits = (64 - capacity.leading_zeros()) as usize; // ceil(log2(c + 1))
    let mut w: Vec<u64> = (0..bits.saturating_sub(1)).map(|k| 1u64 << k).collect();
    if bits > 0 {
        w.push(capacity - ((1u64 << (bits - 1)) - 1));
    }
    w
}

fn max_flow(g: &Graph, p: &mut ProblemParams) -> Built {
    let (s, t) = terminals(g)?;
    // A < 1 keeps a unit of unbalanced flow from paying for itself.
    let a = positive("A", p.penalty_a.unwrap_or(0.5))?;
    p.penalty_a = Some(a);

    let mut layout: Vec<(usize, usize, u64)> = Vec::new(); // (edge, bit, weight)
    let mut edge_vars: Vec<Vec<usize>> = Vec::with_capacity(g.edges.len());
    for (i, e) in g.edges.iter().enumerate() {
        if libm::trunc(e.weight) != e.weight || e.weight < 1.0 || e.weight > 1e6 {
            return Err(invalid(format!("edge {i} capacity {} is not a positive integer", e.weight)));
        }
        let mut vars = Vec::new();
        for (bit, w) in capacity_bits(e.weight as u64).into_iter().enumerate() {
            vars.push(layout.len());
            layout.push((i, bit, w));
        }
        edge_vars.push(vars);
    }
    let n = layout.len();
    if n == 0 {
        return Err(invalid("max flow needs at least one edge"));
    }
    let flow = |edge: usize, sign: f64| -> Vec<(usize, f64)> {
        edge_vars[edge]
            .iter()
            .map(|&k| (k, sign * layout[k].2 as f64))
            .collect()
    };

    let mut poly = Poly::new(n);
    // Conservation at every node other than the terminals.
    for v in (0..g.n_nodes).filter(|&v| v != s && v != t) {
        let mut coeffs = Vec::new();
        for (i, e) in g.edges.iter().enumerate() {
            if e.u == v {
                coeffs.extend(flow(i, 1.0));
            } else if e.v == v {
                coeffs.extend(flow(i, -1.0));
            }
        }
        if !coeffs.is_empty() {
            poly.add_scaled(&lin(n, 0.0, &coeffs).square(), 1.0);
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        if e.v == t {
            poly.add_scaled(&lin(n, 0.0, &flow(i, 1.0)), -a);
        }
    }
    let doc = layout
        .iter()
        .map(|&(i, bit, w)| format!("z_{{{}->{}}}[b{bit}:{w}]", g.edges[i].u, g.edges[i].v))
        .collect();
    Ok((poly, doc))
}

fn min_cut(g: &Graph, p: &mut ProblemParams) -> Built {
    let (s, t) = terminals(g)?;
    let total: f64 = g.edges.iter().map(|e| e.weight).sum();
    let a = positive("A", p.penalty_a.unwrap_or(total + 1.0))?;
    if a <= total {
        return Err(penalty(format!("A = {a} must exceed the total capacity {total}")));
    }
    p.penalty_a = Some(a);

    let n = g.n_nodes;
    let mut poly = Poly::new(n);
    poly.add_term(&[s], -a);
    poly.add_term(&[s, t], a);
    for e in &g.edges {
        poly.add_term(&[e.u], e.weight);
        poly.add_term(&[e.u, e.v], -e.weight);
    }
    Ok((poly, (0..n).map(|v| label("x", &[v])).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::brute_force_poly;

    #[test]
    fn capacity_encoding_reaches_exactly_capacity() {
        for c in 1..=64u64 {
            let w = capacity_bits(c);
            let bits = (64 - c.leading_zeros()) as usize;
            assert_eq!(w.len(), bits, "c={c}");
            assert_eq!(w.iter().sum::<u64>(), c);
            // Every value 0..=c is representable.
            let mut reach = vec![false; c as usize + 1];
            for mask in 0u64..(1 << w.len()) {
                let v: u64 = (0..w.len()).filter(|k| mask >> k & 1 == 1).map(|k| w[k]).sum();
                reach[v as usize] = true;
            }
            assert!(reach.iter().all(|&r| r), "c={c}");
        }
        assert_eq!(capacity_bits(5), [1, 2, 2]);
        assert_eq!(capacity_bits(1), [1]);
    }

    #[test]
    fn connected_component_drops_pinned_variable() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)]);
        let mut p = ProblemParams::default();
        let (poly, doc) = connected_component(&g, &mut p).unwrap();
        assert_eq!(poly.n_vars, 2);
        assert_eq!(doc, ["x_{1}", "x_{2}"]);
        // Component of node 0 is {0, 1}: x_1 = 1, x_2 = 0 gives value 2.
        assert_eq!(poly.evaluate(&[true, false]), 2.0);
        assert!(poly.evaluate(&[false, false]) > 2.0);
    }

    #[test]
    fn connected_component_on_path_selects_whole_path() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        let mut p = ProblemParams::default();
        let (poly, _) = connected_component(&g, &mut p).unwrap();
        let sol = brute_force_poly(&poly).unwrap();
        assert_eq!(sol.argmins, [0b1111]);
        assert_eq!(sol.best_value, 5.0);
    }

    #[test]
    fn max_flow_single_path() {
        // 0 -> 1 -> 2 with capacities 2 and 1: max flow 1.
        let mut g = Graph::from_edges(3, &[(0, 1, 2.0), (1, 2, 1.0)]);
        g.directed = true;
        g.source = Some(0);
        g.sink = Some(2);
        let mut p = ProblemParams::default();
        let (poly, doc) = max_flow(&g, &mut p).unwrap();
        assert_eq!(doc, ["z_{0->1}[b0:1]", "z_{0->1}[b1:1]", "z_{1->2}[b0:1]"]);
        // z01 = 1 (one bit), z12 = 1: balanced, value -A.
        assert_eq!(poly.evaluate(&[true, false, true]), -0.5);
        assert_eq!(brute_force_poly(&poly).unwrap().best_value, -0.5);
        assert_eq!(poly.evaluate(&[false, false, false]), 0.0);
    }
}
