//! Small canonical networks used throughout the tests and docs.
//!
//! Node names are their indices as strings. Unless stated otherwise the
//! central node is `0` and the remaining nodes are the boundary.

use crate::exprlaw::EdgeLaw;
use crate::graph::{DirectedGraph, NodePartition};
use crate::potential::Network;

pub const DIODE: &str = "exp(y) - 1";

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn laws(texts: &[&str]) -> Vec<EdgeLaw> {
    texts.iter().map(|t| EdgeLaw::conductance(t).expect("fixture law")).collect()
}

/// Builds a network from index edges, conductance texts, and a boundary list.
pub fn network(n: usize, edges: &[(usize, usize)], law_texts: &[&str], boundary: &[usize]) -> Network {
    let graph = DirectedGraph::new(names(n), edges.to_vec()).expect("fixture graph");
    let partition = NodePartition::new(n, boundary.to_vec()).expect("fixture partition");
    Network::new(graph, laws(law_texts), partition).expect("fixture network")
}

/// Two diodes in series with opposite orientation: edges 1→0 and 2→0.
pub fn diode_pair_opposite() -> Network {
    network(3, &[(1, 0), (2, 0)], &[DIODE, DIODE], &[1, 2])
}

/// Two diodes in series with the same orientation: edges 1→0 and 0→2.
pub fn diode_pair_same() -> Network {
    network(3, &[(1, 0), (0, 2)], &[DIODE, DIODE], &[1, 2])
}

/// Series pair 1→0, 0→2 with the given laws; node 0 central.
pub fn series(law_texts: &[&str; 2]) -> Network {
    network(3, &[(1, 0), (0, 2)], law_texts, &[1, 2])
}

/// Single edge 0→1 with both nodes on the boundary.
pub fn two_node(law_texts: &[&str; 1]) -> Network {
    network(2, &[(0, 1)], law_texts, &[0, 1])
}

/// Star with `k` unit linear edges 0→i; center 0 central, leaves boundary.
pub fn unit_star(k: usize) -> Network {
    let edges: Vec<(usize, usize)> = (1..=k).map(|i| (0, i)).collect();
    let texts = vec!["y"; k];
    let boundary: Vec<usize> = (1..=k).collect();
    network(k + 1, &edges, &texts, &boundary)
}

/// Boundary triangle 1-2-3 plus a central node 0 joined to all three, with
/// linear laws of distinct conductances. The reduced graph is a triangle.
pub fn quadratic_cyclic_triangle() -> Network {
    network(
        4,
        &[(1, 2), (2, 3), (1, 3), (0, 1), (0, 2), (3, 0)],
        &["y", "2*y", "0.5*y", "1.5*y", "y", "3*y"],
        &[1, 2, 3],
    )
}

/// The same topology as [`quadratic_cyclic_triangle`] with diode laws.
pub fn diode_cyclic_triangle() -> Network {
    network(4, &[(1, 2), (2, 3), (1, 3), (0, 1), (0, 2), (3, 0)], &[DIODE; 6], &[1, 2, 3])
}

/// Acyclic reduction with three boundary nodes: a path 1 -(0)- 2 -(4)- 3
/// where 0 and 4 are central, mixing diode and tanh-type laws.
pub fn mixed_chain() -> Network {
    network(
        5,
        &[(1, 0), (0, 2), (2, 4), (3, 4)],
        &[DIODE, "2*y + sinh(y)", "tanh(y) + 0.5*y", DIODE],
        &[1, 2, 3],
    )
}
