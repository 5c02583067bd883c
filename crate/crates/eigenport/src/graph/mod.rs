//! Graph representation, canonical builders, and the bidirected incidence
//! operator used by the transport stage.
//!
//! Graphs are undirected with strictly positive edge lengths. Edges are stored
//! with endpoints normalized to `u < v`; the bidirected incidence doubles each
//! edge into a forward arc (low to high node index) and a backward arc so that
//! nonnegative flows can move mass in either direction.

mod parse;

pub use parse::{parse_edge_list, parse_swc, parse_swc_with, ParseError, SwcLengths};

use nalgebra::DMatrix;
use thiserror::Error;

/// Errors produced while constructing or validating a graph.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    NoNodes,
    #[error("node {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: usize },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge ({u}, {v}) has non-positive length {length}")]
    NonPositiveLength { u: usize, v: usize, length: f64 },
    #[error("coordinate list has {got} entries for {expected} nodes")]
    CoordCountMismatch { got: usize, expected: usize },
    #[error("cycle needs at least 3 nodes, got {got}")]
    CycleTooShort { got: usize },
    #[error("star-like tree needs at least 3 branches, got {got}")]
    TooFewBranches { got: usize },
    #[error("star-like branch {index} must have at least one node")]
    EmptyBranch { index: usize },
}

/// An undirected edge with endpoints normalized to `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

/// An undirected graph with positive edge lengths and optional node
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    coords: Option<Vec<[f64; 3]>>,
}

impl Graph {
    /// Builds a graph from raw `(u, v, length)` triples, normalizing endpoint
    /// order and rejecting self-loops, duplicates, out-of-range nodes, and
    /// non-positive lengths.
    pub fn new(
        node_count: usize,
        raw_edges: impl IntoIterator<Item = (usize, usize, f64)>,
        coords: Option<Vec<[f64; 3]>>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::NoNodes);
        }
        if let Some(c) = &coords {
            if c.len() != node_count {
                return Err(GraphError::CoordCountMismatch {
                    got: c.len(),
                    expected: node_count,
                });
            }
        }
        let mut edges = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (a, b, length) in raw_edges {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            if v >= node_count {
                return Err(GraphError::NodeOutOfRange {
                    node: v,
                    node_count,
                });
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge { u, v });
            }
            if length <= 0.0 || !length.is_finite() {
                return Err(GraphError::NonPositiveLength { u, v, length });
            }
            edges.push(Edge { u, v, length });
        }
        Ok(Self {
            node_count,
            edges,
            coords,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[[f64; 3]]> {
        self.coords.as_deref()
    }

    /// Node degrees in the undirected graph.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Adjacency lists as `(neighbor, edge index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        adj
    }

    /// True when every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.node_count
    }

    /// True when the graph is connected with exactly `n - 1` edges.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count && self.is_connected()
    }
}

/// Path graph on `n >= 1` nodes with unit lengths and coordinates `(i, 0)`.
pub fn build_path(n: usize) -> Result<Graph, GraphError> {
    let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0));
    let coords = (0..n).map(|i| [i as f64, 0.0, 0.0]).collect();
    Graph::new(n, edges, Some(coords))
}

/// Cycle graph on `n >= 3` nodes with unit lengths; coordinates place the
/// nodes on a circle whose chord between neighbors is 1.
pub fn build_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::CycleTooShort { got: n });
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n, 1.0));
    let radius = 0.5 / (std::f64::consts::PI / n as f64).sin();
    let coords = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [radius * theta.cos(), radius * theta.sin(), 0.0]
        })
        .collect();
    Graph::new(n, edges, Some(coords))
}

/// Rectangular grid with `m` columns and `n` rows; node `(x, y)` has index
/// `y * m + x`, unit lengths, and coordinates `(x, y)`.
pub fn build_grid(m: usize, n: usize) -> Result<Graph, GraphError> {
    if m == 0 || n == 0 {
        return Err(GraphError::NoNodes);
    }
    let idx = |x: usize, y: usize| y * m + x;
    let mut edges = Vec::new();
    for y in 0..n {
        for x in 0..m.saturating_sub(1) {
            edges.push((idx(x, y), idx(x + 1, y), 1.0));
        }
    }
    for y in 0..n.saturating_sub(1) {
        for x in 0..m {
            edges.push((idx(x, y), idx(x, y + 1), 1.0));
        }
    }
    let mut coords = vec![[0.0; 3]; m * n];
    for y in 0..n {
        for x in 0..m {
            coords[idx(x, y)] = [x as f64, y as f64, 0.0];
        }
    }
    Graph::new(m * n, edges, Some(coords))
}

/// Star-like tree: a center node (index 0) with `branch_lengths.len() >= 3`
/// simple paths attached. Branch `b` of length `L` contributes `L` nodes
/// numbered consecutively after all earlier branches.
pub fn build_starlike_tree(branch_lengths: &[usize]) -> Result<Graph, GraphError> {
    if branch_lengths.len() < 3 {
        return Err(GraphError::TooFewBranches {
            got: branch_lengths.len(),
        });
    }
    let mut edges = Vec::new();
    let mut coords = vec![[0.0; 3]];
    let mut next = 1;
    for (b, &len) in branch_lengths.iter().enumerate() {
        if len == 0 {
            return Err(GraphError::EmptyBranch { index: b });
        }
        let theta = 2.0 * std::f64::consts::PI * b as f64 / branch_lengths.len() as f64;
        let mut prev = 0;
        for j in 0..len {
            edges.push((prev, next, 1.0));
            let r = (j + 1) as f64;
            coords.push([r * theta.cos(), r * theta.sin(), 0.0]);
            prev = next;
            next += 1;
        }
    }
    Graph::new(next, edges, Some(coords))
}

/// Bidirected incidence operator. Column `k < m` is edge `k` oriented from its
/// low-index endpoint to its high-index endpoint; column `m + k` is the same
/// edge reversed. A column carries `-1` at its tail and `+1` at its head.
#[derive(Debug, Clone, PartialEq)]
pub struct BidirectedIncidence {
    node_count: usize,
    edge_count: usize,
    arcs: Vec<(usize, usize)>,
    lengths: Vec<f64>,
}

/// Builds the bidirected incidence operator of a graph.
pub fn incidence_matrices(g: &Graph) -> BidirectedIncidence {
    let m = g.edge_count();
    let mut arcs = Vec::with_capacity(2 * m);
    for e in g.edges() {
        arcs.push((e.u, e.v));
    }
    for e in g.edges() {
        arcs.push((e.v, e.u));
    }
    BidirectedIncidence {
        node_count: g.node_count(),
        edge_count: m,
        arcs,
        lengths: g.edges().iter().map(|e| e.length).collect(),
    }
}

impl BidirectedIncidence {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of arc columns, `2 m`.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Tail and head node of arc column `k`.
    pub fn arc(&self, k: usize) -> (usize, usize) {
        self.arcs[k]
    }

    /// Length of the undirected edge behind arc column `k`.
    pub fn arc_length(&self, k: usize) -> f64 {
        self.lengths[k % self.edge_count]
    }

    /// Applies the operator to an arc flow vector: net inflow per node.
    pub fn apply(&self, flows: &[f64]) -> Vec<f64> {
        assert_eq!(flows.len(), self.arcs.len());
        let mut out = vec![0.0; self.node_count];
        for (k, &(tail, head)) in self.arcs.iter().enumerate() {
            out[tail] -= flows[k];
            out[head] += flows[k];
        }
        out
    }

    /// Dense `n x 2m` matrix form of the operator.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.node_count, self.arcs.len());
        for (k, &(tail, head)) in self.arcs.iter().enumerate() {
            q[(tail, k)] = -1.0;
            q[(head, k)] = 1.0;
        }
        q
    }
}

/// Serializes the edge set as `u v length` lines; lengths keep full precision
/// so a parse of the output reproduces them exactly.
pub fn serialize_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        out.push_str(&format!(
            "{} {} {}\n",
            e.u,
            e.v,
            crate::util::fmt_f64(e.length)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_one_node_has_no_edges() {
        let g = build_path(1).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_tree());
    }

    #[test]
    fn path_of_zero_nodes_is_rejected() {
        assert_eq!(build_path(0), Err(GraphError::NoNodes));
    }

    #[test]
    fn path_edges_are_consecutive_with_unit_length() {
        let g = build_path(4).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(g.edges().iter().all(|e| e.length == 1.0));
        assert_eq!(g.coords().unwrap()[3], [3.0, 0.0, 0.0]);
    }

    #[test]
    fn cycle_normalizes_wraparound_edge() {
        let g = build_cycle(5).unwrap();
        assert_eq!(g.edge_count(), 5);
        let last = &g.edges()[4];
        assert_eq!((last.u, last.v), (0, 4));
        assert!(!g.is_tree());
        assert!(g.is_connected());
    }

    #[test]
    fn cycle_below_three_nodes_is_rejected() {
        assert_eq!(build_cycle(2), Err(GraphError::CycleTooShort { got: 2 }));
    }

    #[test]
    fn grid_7x3_has_21_nodes_and_32_edges() {
        let g = build_grid(7, 3).unwrap();
        assert_eq!(g.node_count(), 21);
        assert_eq!(g.edge_count(), 32);
        assert!(g.is_connected());
    }

    #[test]
    fn grid_node_indexing_is_row_major() {
        let g = build_grid(7, 3).unwrap();
        let coords = g.coords().unwrap();
        assert_eq!(coords[7 + 4], [4.0, 1.0, 0.0]);
    }

    #[test]
    fn grid_with_one_row_matches_path() {
        let grid = build_grid(6, 1).unwrap();
        let path = build_path(6).unwrap();
        assert_eq!(grid.edges(), path.edges());
    }

    #[test]
    fn starlike_5_5_5_has_16_nodes() {
        let g = build_starlike_tree(&[5, 5, 5]).unwrap();
        assert_eq!(g.node_count(), 16);
        assert_eq!(g.edge_count(), 15);
        assert!(g.is_tree());
        assert_eq!(g.degrees()[0], 3);
    }

    #[test]
    fn starlike_rejects_fewer_than_three_branches() {
        assert_eq!(
            build_starlike_tree(&[4, 4]),
            Err(GraphError::TooFewBranches { got: 2 })
        );
        assert_eq!(
            build_starlike_tree(&[4, 0, 4]),
            Err(GraphError::EmptyBranch { index: 1 })
        );
    }

    #[test]
    fn new_rejects_self_loops_duplicates_and_bad_lengths() {
        assert_eq!(
            Graph::new(3, vec![(1, 1, 1.0)], None),
            Err(GraphError::SelfLoop { node: 1 })
        );
        assert_eq!(
            Graph::new(3, vec![(0, 1, 1.0), (1, 0, 2.0)], None),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            Graph::new(3, vec![(0, 1, 0.0)], None),
            Err(GraphError::NonPositiveLength {
                u: 0,
                v: 1,
                length: 0.0
            })
        );
        assert_eq!(
            Graph::new(2, vec![(0, 5, 1.0)], None),
            Err(GraphError::NodeOutOfRange {
                node: 5,
                node_count: 2
            })
        );
    }

    #[test]
    fn incidence_of_p2_has_two_opposite_columns() {
        let g = build_path(2).unwrap();
        let inc = incidence_matrices(&g);
        assert_eq!(inc.arc_count(), 2);
        assert_eq!(inc.arc(0), (0, 1));
        assert_eq!(inc.arc(1), (1, 0));
        let q = inc.dense();
        assert_eq!(q.column(0).as_slice(), &[-1.0, 1.0]);
        assert_eq!(q.column(1).as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn incidence_of_grid_7x3_is_21_by_64() {
        let g = build_grid(7, 3).unwrap();
        let inc = incidence_matrices(&g);
        let q = inc.dense();
        assert_eq!(q.shape(), (21, 64));
        for k in 0..inc.arc_count() {
            let col = q.column(k);
            assert_eq!(col.sum(), 0.0);
            assert_eq!(col.iter().map(|x| x.abs()).sum::<f64>(), 2.0);
        }
    }

    #[test]
    fn incidence_apply_matches_dense_product() {
        let g = build_cycle(4).unwrap();
        let inc = incidence_matrices(&g);
        let w: Vec<f64> = (0..inc.arc_count()).map(|k| 0.25 * (k + 1) as f64).collect();
        let fast = inc.apply(&w);
        let dense = inc.dense() * nalgebra::DVector::from_vec(w);
        for (a, b) in fast.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn arc_lengths_are_shared_between_directions() {
        let g = Graph::new(3, vec![(0, 1, 2.5), (1, 2, 0.5)], None).unwrap();
        let inc = incidence_matrices(&g);
        assert_eq!(inc.arc_length(0), 2.5);
        assert_eq!(inc.arc_length(2), 2.5);
        assert_eq!(inc.arc_length(1), 0.5);
        assert_eq!(inc.arc_length(3), 0.5);
    }

    #[test]
    fn disconnected_graph_is_detected() {
        let g = Graph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)], None).unwrap();
        assert!(!g.is_connected());
        assert!(!g.is_tree());
    }
}
