//! Directed graphs, incidence algebra, and Laplacian sign-pattern
//! reconstruction.
//!
//! Incidence convention: column `j` of `D` holds `+1` at the head (`to`)
//! node and `-1` at the tail (`from`) node, so `(Dᵀz)_j = z_head − z_tail`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("edge {edge} is a self-loop on node `{node}`")]
    SelfLoop { edge: usize, node: String },
    #[error("edge {edge} references node index {index} but graph has {n} nodes")]
    NodeOutOfRange { edge: usize, index: usize, n: usize },
    #[error("boundary set must be nonempty")]
    EmptyBoundary,
    #[error("node index {0} listed twice or out of range in boundary set")]
    BadBoundary(usize),
    #[error("matrix is not square or does not match the {0} node names")]
    Shape(usize),
    #[error("matrix is not symmetric: |L[{i},{k}] - L[{k},{i}]| = {gap}")]
    NotSymmetric { i: usize, k: usize, gap: f64 },
    #[error("positive off-diagonal entry L[{i},{k}] = {value}")]
    PositiveOffDiagonal { i: usize, k: usize, value: f64 },
    #[error("row {row} sums to {sum}")]
    NonzeroRowSum { row: usize, sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
}

impl DirectedGraph {
    /// Builds a graph from node names and `(from, to)` index pairs.
    /// Parallel edges are allowed; self-loops are not.
    pub fn new(nodes: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut seen = HashMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }
        let n = nodes.len();
        for (edge, &(from, to)) in edges.iter().enumerate() {
            for index in [from, to] {
                if index >= n {
                    return Err(GraphError::NodeOutOfRange { edge, index, n });
                }
            }
            if from == to {
                return Err(GraphError::SelfLoop { edge, node: nodes[from].clone() });
            }
        }
        Ok(DirectedGraph { nodes, edges })
    }

    pub fn from_names<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self, GraphError> {
        let names: Vec<String> = nodes.iter().map(|s| s.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let lookup = |s: &S| {
            index
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| GraphError::UnknownNode(s.as_ref().to_string()))
        };
        let pairs = edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        DirectedGraph::new(names, pairs)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|s| s == name)
    }

    fn components(&self) -> (UnionFind, usize) {
        let mut uf = UnionFind::new(self.nodes.len());
        let mut merges = 0;
        for &(a, b) in &self.edges {
            if uf.union(a, b) {
                merges += 1;
            }
        }
        (uf, self.nodes.len() - merges)
    }

    /// Number of connected components of the underlying undirected graph.
    pub fn component_count(&self) -> usize {
        self.components().1
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// True iff the underlying undirected (multi)graph is a forest.
    pub fn is_acyclic(&self) -> bool {
        self.edges.len() + self.component_count() == self.nodes.len()
    }

    /// Same nodes and edges with edge `j` reversed.
    pub fn with_reversed_edge(&self, j: usize) -> DirectedGraph {
        let mut edges = self.edges.clone();
        edges[j] = (edges[j].1, edges[j].0);
        DirectedGraph { nodes: self.nodes.clone(), edges }
    }

    /// Spanning forest (edge indices) and the remaining chords, in edge order.
    pub fn spanning_forest(&self) -> (Vec<usize>, Vec<usize>) {
        let mut uf = UnionFind::new(self.nodes.len());
        let (mut tree, mut chords) = (Vec::new(), Vec::new());
        for (j, &(a, b)) in self.edges.iter().enumerate() {
            if uf.union(a, b) {
                tree.push(j);
            } else {
                chords.push(j);
            }
        }
        (tree, chords)
    }

    /// Fundamental cycle matrix `F` (m × #chords): column `c` is the signed
    /// edge indicator of the cycle closed by chord `c` through the spanning
    /// forest, oriented along the chord. `D·F = 0`.
    pub fn fundamental_cycles(&self) -> (DMatrix<f64>, Vec<usize>) {
        let (tree, chords) = self.spanning_forest();
        let n = self.nodes.len();
        // tree adjacency: (neighbor, edge, sign of traversal along edge direction)
        let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
        for &j in &tree {
            let (a, b) = self.edges[j];
            adj[a].push((b, j, 1.0));
            adj[b].push((a, j, -1.0));
        }
        let mut f = DMatrix::zeros(self.edges.len(), chords.len());
        for (c, &chord) in chords.iter().enumerate() {
            let (tail, head) = self.edges[chord];
            f[(chord, c)] = 1.0;
            // walk the tree path head -> tail
            let mut parent: Vec<Option<(usize, usize, f64)>> = vec![None; n];
            let mut visited = vec![false; n];
            let mut queue = VecDeque::from([head]);
            visited[head] = true;
            while let Some(u) = queue.pop_front() {
                if u == tail {
                    break;
                }
                for &(v, j, s) in &adj[u] {
                    if !visited[v] {
                        visited[v] = true;
                        parent[v] = Some((u, j, s));
                        queue.push_back(v);
                    }
                }
            }
            let mut v = tail;
            while v != head {
                let (u, j, s) = parent[v].expect("chord endpoints share a tree component");
                f[(j, c)] += s;
                v = u;
            }
        }
        (f, chords)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Node-by-edge incidence matrix with the head = +1, tail = −1 convention.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    n: usize,
    edges: Vec<(usize, usize)>,
}

pub fn build_incidence(graph: &DirectedGraph) -> IncidenceMatrix {
    IncidenceMatrix { n: graph.node_count(), edges: graph.edges.clone() }
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.edges.len()
    }

    pub fn entry(&self, node: usize, edge: usize) -> i8 {
        let (tail, head) = self.edges[edge];
        if node == head {
            1
        } else if node == tail {
            -1
        } else {
            0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.edges.len());
        for (j, &(tail, head)) in self.edges.iter().enumerate() {
            d[(head, j)] = 1.0;
            d[(tail, j)] = -1.0;
        }
        d
    }

    /// `y = Dᵀz`.
    pub fn edge_voltages(&self, z: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&(tail, head)| z[head] - z[tail]).collect()
    }

    /// `J = D·I`.
    pub fn nodal_sum(&self, edge_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&(tail, head), &v) in self.edges.iter().zip(edge_values) {
            out[head] += v;
            out[tail] -= v;
        }
        out
    }

    /// `D·diag(w)·Dᵀ`.
    pub fn weighted_laplacian(&self, weights: &[f64]) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for (&(tail, head), &w) in self.edges.iter().zip(weights) {
            l[(head, head)] += w;
            l[(tail, tail)] += w;
            l[(head, tail)] -= w;
            l[(tail, head)] -= w;
        }
        l
    }
}

/// Partition of node indices into boundary (kept) and central (eliminated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition {
    boundary: Vec<usize>,
    central: Vec<usize>,
}

impl NodePartition {
    /// `boundary` keeps the caller's order; central nodes are listed in
    /// increasing index order.
    pub fn new(n: usize, boundary: Vec<usize>) -> Result<Self, GraphError> {
        if boundary.is_empty() {
            return Err(GraphError::EmptyBoundary);
        }
        let mut is_boundary = vec![false; n];
        for &b in &boundary {
            if b >= n || is_boundary[b] {
                return Err(GraphError::BadBoundary(b));
            }
            is_boundary[b] = true;
        }
        let central = (0..n).filter(|&i| !is_boundary[i]).collect();
        Ok(NodePartition { boundary, central })
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn central(&self) -> &[usize] {
        &self.central
    }

    pub fn node_count(&self) -> usize {
        self.boundary.len() + self.central.len()
    }
}

/// Pairs of boundary positions `(i, k)`, `i < k`, joined by a path whose
/// interior nodes are all central. This is the support of the Kron-reduced
/// graph.
pub fn boundary_path_support(graph: &DirectedGraph, partition: &NodePartition) -> Vec<(usize, usize)> {
    let n = graph.node_count();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut position = vec![None; n];
    for (p, &b) in partition.boundary().iter().enumerate() {
        position[b] = Some(p);
    }
    let mut pairs = Vec::new();
    for (i, &start) in partition.boundary().iter().enumerate() {
        let mut visited = vec![false; n];
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if visited[v] {
                    continue;
                }
                visited[v] = true;
                match position[v] {
                    Some(k) => {
                        if k > i {
                            pairs.push((i, k));
                        }
                    }
                    None => queue.push_back(v),
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Tolerances for [`graph_from_laplacian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianTolerance {
    /// Structural checks (symmetry, row sums, off-diagonal sign) accept
    /// deviations up to `structure · (1 + ‖L‖∞)`.
    pub structure: f64,
    /// An off-diagonal entry is an edge iff `−L_ik > edge_abs + edge_rel · max diag`.
    pub edge_abs: f64,
    pub edge_rel: f64,
}

impl Default for LaplacianTolerance {
    fn default() -> Self {
        LaplacianTolerance { structure: 1e-9, edge_abs: 1e-10, edge_rel: 1e-9 }
    }
}

/// ∞-norm (max absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Reads a simple weighted graph off a Laplacian: one edge `i → k` (`i < k`)
/// per significantly negative off-diagonal entry, weight `−L_ik`.
pub fn graph_from_laplacian(
    l: &DMatrix<f64>,
    node_ids: &[String],
    tol: LaplacianTolerance,
) -> Result<(DirectedGraph, Vec<f64>), GraphError> {
    let n = node_ids.len();
    if l.nrows() != n || l.ncols() != n {
        return Err(GraphError::Shape(n));
    }
    let scale = tol.structure * (1.0 + inf_norm(l));
    let max_diag = (0..n).map(|i| l[(i, i)]).fold(0.0, f64::max);
    let threshold = tol.edge_abs + tol.edge_rel * max_diag;
    for row in 0..n {
        let sum: f64 = l.row(row).iter().sum();
        if sum.abs() > scale {
            return Err(GraphError::NonzeroRowSum { row, sum });
        }
    }
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for k in i + 1..n {
            let gap = (l[(i, k)] - l[(k, i)]).abs();
            if gap > scale {
                return Err(GraphError::NotSymmetric { i, k, gap });
            }
            let value = 0.5 * (l[(i, k)] + l[(k, i)]);
            if value > scale {
                return Err(GraphError::PositiveOffDiagonal { i, k, value });
            }
            if -value > threshold {
                edges.push((i, k));
                weights.push(-value);
            }
        }
    }
    Ok((DirectedGraph::new(node_ids.to_vec(), edges)?, weights))
}

/// Numeric rank via singular values relative to `tol · σ_max` (absolute when
/// `σ_max < 1`).
pub fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let cutoff = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}
