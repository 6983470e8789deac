//! Graph optimization problems as pseudo-Boolean polynomials.
//!
//! Eleven problem kinds are supported. Each builder expands its penalty terms
//! into a fully multiplied-out polynomial and records what every variable
//! means in `var_doc`. Penalty constants default to values that satisfy the
//! inequality each formulation needs, and any override is checked against it.

mod build;
pub mod check;
mod graph;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use graph::{random_graph, random_permutation, Edge, Graph};

use crate::hamiltonian::PseudoBooleanPolynomial;
use crate::rng::derive_seed;

pub const DEFAULT_EDGE_PROB: f64 = 0.5;
pub const BRUTE_FORCE_LIMIT: usize = 24;
/// Values within this distance of the minimum count as minimizers.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("penalty constraint violated: {0}")]
    Penalty(String),
    #[error("{n_vars} variables exceeds the brute-force limit {limit}")]
    TooLarge { n_vars: usize, limit: usize },
    #[error("unknown problem kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    ConnectedComponent,
    CommunityDetection,
    KClique,
    GraphIsomorphism,
    GraphColoring,
    Tsp,
    MinMaximalMatching,
    VertexCover,
    EdgeCover,
    MaxFlow,
    MinCut,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 11] = [
        ProblemKind::ConnectedComponent,
        ProblemKind::CommunityDetection,
        ProblemKind::KClique,
        ProblemKind::GraphIsomorphism,
        ProblemKind::GraphColoring,
        ProblemKind::Tsp,
        ProblemKind::MinMaximalMatching,
        ProblemKind::VertexCover,
        ProblemKind::EdgeCover,
        ProblemKind::MaxFlow,
        ProblemKind::MinCut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::ConnectedComponent => "connected_component",
            ProblemKind::CommunityDetection => "community_detection",
            ProblemKind::KClique => "k_clique",
            ProblemKind::GraphIsomorphism => "graph_isomorphism",
            ProblemKind::GraphColoring => "graph_coloring",
            ProblemKind::Tsp => "tsp",
            ProblemKind::MinMaximalMatching => "min_maximal_matching",
            ProblemKind::VertexCover => "vertex_cover",
            ProblemKind::EdgeCover => "edge_cover",
            ProblemKind::MaxFlow => "max_flow",
            ProblemKind::MinCut => "min_cut",
        }
    }

    /// Whether random instances of this kind carry integer edge weights.
    pub fn weighted(self) -> bool {
        matches!(
            self,
            ProblemKind::CommunityDetection
                | ProblemKind::Tsp
                | ProblemKind::MinMaximalMatching
                | ProblemKind::MaxFlow
                | ProblemKind::MinCut
        )
    }

    pub fn is_flow(self) -> bool {
        matches!(self, ProblemKind::MaxFlow | ProblemKind::MinCut)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProblemError::UnknownKind(s.into()))
    }
}

/// Kind-specific knobs. `None` means "use the default"; a built instance
/// stores the resolved values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Clique size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_colors: Option<usize>,
    /// Number of communities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub communities: Option<usize>,
    /// Node pinned into the connected component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_node: Option<usize>,
    /// Constraint penalty (`A`, or `P` for community detection).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_a: Option<f64>,
    /// Objective weight (`B`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub kind: ProblemKind,
    pub graph: Graph,
    /// Second graph, only for isomorphism.
    pub graph2: Option<Graph>,
    pub params: ProblemParams,
    pub poly: PseudoBooleanPolynomial,
    /// Label of each variable, e.g. `x_{3,1}`.
    pub var_doc: Vec<String>,
}

impl ProblemInstance {
    pub fn n_vars(&self) -> usize {
        self.poly.n_vars
    }
}

/// Builds the polynomial for `kind` on `graph`.
///
/// `graph2` is required for isomorphism and ignored otherwise.
pub fn build_problem(
    kind: ProblemKind,
    graph: &Graph,
    graph2: Option<&Graph>,
    params: &ProblemParams,
) -> Result<ProblemInstance, ProblemError> {
    graph.validate()?;
    if graph.n_nodes == 0 {
        return Err(ProblemError::InvalidGraph("graph has no nodes".into()));
    }
    build::build(kind, graph, graph2, params)
}

/// Exact minimum of the instance polynomial over all assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSolution {
    pub best_value: f64,
    /// Minimizing assignments as basis indices (bit `i` = variable `i`).
    pub argmins: Vec<u64>,
}

pub fn brute_force_solve(instance: &ProblemInstance) -> Result<BruteForceSolution, ProblemError> {
    brute_force_poly(&instance.poly)
}

pub fn brute_force_poly(poly: &PseudoBooleanPolynomial) -> Result<BruteForceSolution, ProblemError> {
    let n = poly.n_vars;
    if n > BRUTE_FORCE_LIMIT {
        return Err(ProblemError::TooLarge {
            n_vars: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let values: Vec<f64> = (0..(1u64 << n)).map(|b| poly.evaluate_index(b)).collect();
    let best_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let argmins = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v - best_value <= TIE_TOLERANCE)
        .map(|(b, _)| b as u64)
        .collect();
    Ok(BruteForceSolution {
        best_value,
        argmins,
    })
}

/// Default random instance of `kind` on `n` nodes.
///
/// Isomorphism pairs the graph with a seeded relabeling of itself; flow
/// problems orient edges from lower to higher index with source 0 and sink
/// `n - 1`.
pub fn random_instance(kind: ProblemKind, n: usize, seed: u64) -> Result<ProblemInstance, ProblemError> {
    let mut graph = random_graph(n, DEFAULT_EDGE_PROB, kind.weighted(), seed)?;
    let mut graph2 = None;
    match kind {
        ProblemKind::GraphIsomorphism => {
            let perm = random_permutation(n, derive_seed(seed, 1));
            graph2 = Some(graph.relabeled(&perm));
        }
        k if k.is_flow() => graph = graph.into_flow_network(),
        _ => {}
    }
    build_problem(kind, &graph, graph2.as_ref(), &ProblemParams::default())
}

pub(crate) fn invalid(msg: impl Into<String>) -> ProblemError {
    ProblemError::InvalidParams(msg.into())
}

pub(crate) fn penalty(msg: String) -> ProblemError {
    ProblemError::Penalty(msg)
}

pub(crate) fn label(name: &str, parts: &[usize]) -> String {
    let inner: Vec<String> = parts.iter().map(|p| format!("{p}")).collect();
    format!("{name}_{{{}}}", inner.join(","))
}
