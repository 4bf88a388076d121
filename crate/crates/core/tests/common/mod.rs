#![allow(dead_code)]

use kronred::graph::{DirectedGraph, NodePartition};
use kronred::{EdgeLaw, Network};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIXED_LAWS: &[&str] = &["exp(y) - 1", "2*y + sinh(y)", "tanh(y) + 0.5*y", "y + y^3", "3*y"];
pub const ODD_LAWS: &[&str] = &["sinh(y)", "tanh(y) + 0.5*y", "y + y^3", "2*y"];

pub enum Laws<'a> {
    Linear,
    Pool(&'a [&'a str]),
}

/// Connected graph on `n` nodes: a random tree plus up to `n` extra simple
/// edges, random orientations. Boundary is a shuffled subset leaving at
/// least one central node.
pub fn random_network(seed: u64, max_nodes: usize, laws: Laws) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=max_nodes);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let linked = |edges: &[(usize, usize)], a: usize, b: usize| edges.iter().any(|&e| e == (a, b) || e == (b, a));
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    }
    for _ in 0..rng.gen_range(0..=n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !linked(&edges, a, b) {
            edges.push((a, b));
        }
    }
    let texts: Vec<String> = edges
        .iter()
        .map(|_| match &laws {
            Laws::Linear => format!("{:.6}*y", rng.gen_range(0.5..3.0)),
            Laws::Pool(pool) => pool[rng.gen_range(0..pool.len())].to_string(),
        })
        .collect();
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let n_b = rng.gen_range(2..n);
    let boundary = nodes[..n_b].to_vec();

    let names = (0..n).map(|i| format!("n{i}")).collect();
    let graph = DirectedGraph::new(names, edges).unwrap();
    let laws = texts.iter().map(|t| EdgeLaw::conductance(t).unwrap()).collect();
    Network::new(graph, laws, NodePartition::new(n, boundary).unwrap()).unwrap()
}

pub fn random_point(seed: u64, n: usize, range: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-range..range)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inf(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}
