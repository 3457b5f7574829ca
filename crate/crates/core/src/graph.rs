//! Unweighted graphs induced by thresholding one attention head.
//!
//! Token `i` attending to token `j` with weight `w_ij ≥ t` gives the directed edge `j → i`.
//! The diagonal is dropped unless self-loops are explicitly kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::WeightsView;

/// Default thresholds, spanning near-complete to near-empty graphs.
pub const DEFAULT_THRESHOLDS: [f64; 6] = [0.025, 0.05, 0.1, 0.25, 0.5, 0.75];

/// Strictly increasing thresholds inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdSet(Vec<f64>);

impl ThresholdSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("threshold set is empty".into()));
        }
        if let Some(t) = values.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::Config(format!("threshold {t} is outside (0, 1)")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("thresholds must be strictly increasing".into()));
        }
        Ok(ThresholdSet(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ThresholdSet {
    fn default() -> Self {
        ThresholdSet(DEFAULT_THRESHOLDS.to_vec())
    }
}

impl TryFrom<Vec<f64>> for ThresholdSet {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ThresholdSet::new(values)
    }
}

impl From<ThresholdSet> for Vec<f64> {
    fn from(t: ThresholdSet) -> Self {
        t.0
    }
}

/// Directed graph with sorted out-adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    out: Vec<Vec<usize>>,
    edge_count: usize,
}

impl DirectedGraph {
    /// Duplicate edges are merged; out-of-range endpoints panic.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for n = {n}");
            out[u].push(v);
        }
        let mut edge_count = 0;
        for adj in &mut out {
            adj.sort_unstable();
            adj.dedup();
            edge_count += adj.len();
        }
        DirectedGraph { n, out, edge_count }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// Edges `(from, to)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&v| (u, v)))
    }

    pub fn self_loops(&self) -> usize {
        (0..self.n).filter(|&u| self.has_edge(u, u)).count()
    }
}

/// Undirected graph; edges stored as `(min, max)` pairs in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<_> = edges
            .into_iter()
            .map(|(u, v)| {
                assert!(u < n && v < n, "edge ({u}, {v}) out of range for n = {n}");
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        UndirectedGraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Edge `j → i` for every `w_ij ≥ t`. The diagonal is skipped unless `keep_self_loops`.
pub fn threshold_graph(weights: WeightsView<'_>, t: f64, keep_self_loops: bool) -> DirectedGraph {
    let n = weights.n();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for (j, &w) in weights.row(i).iter().enumerate() {
            if w >= t && (i != j || keep_self_loops) {
                out[j].push(i);
            }
        }
    }
    let edge_count = out.iter().map(Vec::len).sum();
    // rows are visited in increasing i, so each list is already sorted
    DirectedGraph { n, out, edge_count }
}

/// `{u, v}` for every pair joined in at least one direction.
pub fn symmetrize(g: &DirectedGraph) -> UndirectedGraph {
    UndirectedGraph::from_edges(g.n(), g.edges())
}
