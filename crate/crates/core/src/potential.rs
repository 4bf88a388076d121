//! The network potential `K(z) = Σ_j G_j((Dᵀz)_j)`, its gradient (nodal
//! currents) and Hessian (state-dependent weighted Laplacian).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exprlaw::{EdgeLaw, LawError};
use crate::graph::{build_incidence, DirectedGraph, GraphError, IncidenceMatrix, NodePartition};
use crate::solver::{self, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("network has {edges} edges but {laws} laws")]
    LawCount { edges: usize, laws: usize },
    #[error("graph is not connected ({0} components)")]
    Disconnected(usize),
    #[error("partition covers {partition} nodes, graph has {graph}")]
    PartitionSize { partition: usize, graph: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("potential vector has length {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("edge {edge} ({from} -> {to}): {source}")]
    Edge {
        edge: usize,
        from: String,
        to: String,
        #[source]
        source: LawError,
    },
}

/// A nonlinear network: connected graph, one certified law per edge, and a
/// boundary/central split.
#[derive(Debug, Clone)]
pub struct Network {
    graph: DirectedGraph,
    incidence: IncidenceMatrix,
    laws: Vec<EdgeLaw>,
    partition: NodePartition,
}

impl Network {
    pub fn new(graph: DirectedGraph, laws: Vec<EdgeLaw>, partition: NodePartition) -> Result<Self, NetworkError> {
        if laws.len() != graph.edge_count() {
            return Err(NetworkError::LawCount { edges: graph.edge_count(), laws: laws.len() });
        }
        if partition.node_count() != graph.node_count() {
            return Err(NetworkError::PartitionSize { partition: partition.node_count(), graph: graph.node_count() });
        }
        let components = graph.component_count();
        if components > 1 {
            return Err(NetworkError::Disconnected(components));
        }
        let incidence = build_incidence(&graph);
        Ok(Network { graph, incidence, laws, partition })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn laws(&self) -> &[EdgeLaw] {
        &self.laws
    }

    pub fn partition(&self) -> &NodePartition {
        &self.partition
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Same graph and laws with a different boundary set.
    pub fn with_boundary(&self, boundary: Vec<usize>) -> Result<Network, NetworkError> {
        let partition = NodePartition::new(self.node_count(), boundary)?;
        Network::new(self.graph.clone(), self.laws.clone(), partition)
    }

    /// Assembles a full potential vector from central and boundary parts.
    pub fn assemble(&self, z_c: &[f64], z_b: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.node_count()];
        for (&i, &v) in self.partition.central().iter().zip(z_c) {
            z[i] = v;
        }
        for (&i, &v) in self.partition.boundary().iter().zip(z_b) {
            z[i] = v;
        }
        z
    }

    fn edge_error(&self, edge: usize, source: LawError) -> PotentialError {
        let (from, to) = self.graph.edges()[edge];
        let names = self.graph.nodes();
        PotentialError::Edge { edge, from: names[from].clone(), to: names[to].clone(), source }
    }

    /// `y = Dᵀz`, checked against every edge's validity interval.
    pub fn edge_voltages(&self, z: &[f64]) -> Result<Vec<f64>, PotentialError> {
        if z.len() != self.node_count() {
            return Err(PotentialError::Dimension { got: z.len(), expected: self.node_count() });
        }
        let y = self.incidence.edge_voltages(z);
        for (j, (&v, law)) in y.iter().zip(&self.laws).enumerate() {
            let iv = law.interval();
            if !iv.contains(v) {
                return Err(self.edge_error(j, LawError::OutOfInterval { y: v, lo: iv.lo, hi: iv.hi }));
            }
        }
        Ok(y)
    }

    /// Edge currents `g(Dᵀz)`.
    pub fn edge_currents(&self, z: &[f64]) -> Result<Vec<f64>, PotentialError> {
        let y = self.edge_voltages(z)?;
        Ok(y.iter().zip(&self.laws).map(|(&v, law)| law.g().eval(v)).collect())
    }

    fn edge_slopes(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.laws).map(|(&v, law)| law.g_prime().eval(v)).collect()
    }
}

/// `K(z) = Σ_j G_j((Dᵀz)_j)` with every `G_j(0) = 0`.
pub fn k_value(net: &Network, z: &[f64]) -> Result<f64, PotentialError> {
    let y = net.edge_voltages(z)?;
    let mut total = 0.0;
    for (j, (&v, law)) in y.iter().zip(net.laws()).enumerate() {
        total += law.cocontent(v).map_err(|e| net.edge_error(j, e))?;
    }
    Ok(total)
}

/// `∂K/∂z = D·g(Dᵀz)`.
pub fn nodal_currents(net: &Network, z: &[f64]) -> Result<Vec<f64>, PotentialError> {
    let currents = net.edge_currents(z)?;
    Ok(net.incidence().nodal_sum(&currents))
}

/// `∂²K/∂z² = D·diag(g'(Dᵀz))·Dᵀ`.
pub fn weighted_laplacian(net: &Network, z: &[f64]) -> Result<DMatrix<f64>, PotentialError> {
    let y = net.edge_voltages(z)?;
    Ok(net.incidence().weighted_laplacian(&net.edge_slopes(&y)))
}

/// `K`, `y`, gradient and Hessian in one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialEval {
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub k: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

pub fn evaluate(net: &Network, z: &[f64]) -> Result<PotentialEval, PotentialError> {
    let y = net.edge_voltages(z)?;
    let currents: Vec<f64> = y.iter().zip(net.laws()).map(|(&v, l)| l.g().eval(v)).collect();
    Ok(PotentialEval {
        z: z.to_vec(),
        k: k_value(net, z)?,
        grad: net.incidence().nodal_sum(&currents),
        hess: net.incidence().weighted_laplacian(&net.edge_slopes(&y)),
        y,
    })
}

/// Total power at the nodes, `zᵀ·J`.
pub fn dissipated_power(net: &Network, z: &[f64]) -> Result<f64, PotentialError> {
    let j = nodal_currents(net, z)?;
    Ok(z.iter().zip(&j).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBalance {
    /// `Vᵀ·I` summed over edges.
    pub edge_power: f64,
    /// `ψᵀ·J` summed over nodes.
    pub nodal_power: f64,
    pub difference: f64,
}

impl PowerBalance {
    pub fn within(&self, rel: f64) -> bool {
        self.difference <= rel * (1.0 + self.edge_power.abs())
    }
}

/// Computes `VᵀI` over edges and `ψᵀJ` over nodes independently.
pub fn power_balance_check(net: &Network, z: &[f64]) -> Result<PowerBalance, PotentialError> {
    let y = net.edge_voltages(z)?;
    let currents: Vec<f64> = y.iter().zip(net.laws()).map(|(&v, l)| l.g().eval(v)).collect();
    let edge_power: f64 = y.iter().zip(&currents).map(|(v, i)| v * i).sum();
    let nodal_power = dissipated_power(net, z)?;
    Ok(PowerBalance { edge_power, nodal_power, difference: (edge_power - nodal_power).abs() })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinHeatError {
    #[error("K is not homogeneous of degree {degree}: K({t}·z) = {scaled}, t^k·K(z) = {expected} at z = {z:?}")]
    NotHomogeneous { degree: f64, t: f64, z: Vec<f64>, scaled: f64, expected: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinHeatReport {
    pub constraint_solution: Vec<f64>,
    pub power_minimizer: Vec<f64>,
    pub max_difference: f64,
    pub descent_iterations: usize,
}

const MAX_DESCENT_ITERATIONS: usize = 200_000;
const DESCENT_GRAD_TOL: f64 = 1e-13;
const HOMOGENEITY_TRIALS: usize = 8;
const HOMOGENEITY_RTOL: f64 = 1e-8;

/// Sampled test of `K(t·z) = t^k·K(z)` for `t ∈ {0.5, 2}`.
pub fn homogeneity_test(net: &Network, degree: f64, seed: u64) -> Result<(), MinHeatError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep 2·z inside every interval: |y| ≤ 2·max|z| ≤ min half-width
    let reach = net
        .laws()
        .iter()
        .map(|l| l.interval().lo.abs().min(l.interval().hi))
        .fold(f64::INFINITY, f64::min);
    let amplitude = (reach / 4.0).min(1.0);
    for _ in 0..HOMOGENEITY_TRIALS {
        let z: Vec<f64> = (0..net.node_count()).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
        let base = k_value(net, &z)?;
        for t in [0.5, 2.0] {
            let tz: Vec<f64> = z.iter().map(|v| t * v).collect();
            let scaled = k_value(net, &tz)?;
            let expected = t.powf(degree) * base;
            if (scaled - expected).abs() > HOMOGENEITY_RTOL * (scaled.abs().max(expected.abs()) + f64::MIN_POSITIVE) {
                return Err(MinHeatError::NotHomogeneous { degree, t, z, scaled, expected });
            }
        }
    }
    Ok(())
}

/// Compares the interior constraint solve with a direct minimization of the
/// dissipated power over `z_C` (gradient descent with backtracking). Refuses
/// unless `K` passes the homogeneity test for the given degree.
pub fn min_heat_check(net: &Network, z_b: &[f64], degree: f64) -> Result<MinHeatReport, MinHeatError> {
    homogeneity_test(net, degree, 0x6b72)?;
    let solved = solver::solve_interior(net, z_b, None)?;
    let central = net.partition().central();

    let power = |z_c: &[f64]| dissipated_power(net, &net.assemble(z_c, z_b));
    // ∇_z (zᵀ D g(Dᵀz)) = J + L(z)·z
    let power_gradient = |z_c: &[f64]| -> Result<Vec<f64>, PotentialError> {
        let z = net.assemble(z_c, z_b);
        let j = nodal_currents(net, &z)?;
        let l = weighted_laplacian(net, &z)?;
        let lz = &l * DVector::from_column_slice(&z);
        Ok(central.iter().map(|&i| j[i] + lz[i]).collect())
    };

    let mean = z_b.iter().sum::<f64>() / z_b.len() as f64;
    let mut x = vec![mean; central.len()];
    let mut value = power(&x)?;
    let mut grad = power_gradient(&x)?;
    let mut step = 1.0;
    let mut iterations = 0;
    while iterations < MAX_DESCENT_ITERATIONS {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= DESCENT_GRAD_TOL {
            break;
        }
        iterations += 1;
        step *= 2.0;
        let mut moved = false;
        while step >= 1e-20 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            if let Ok(trial_value) = power(&trial) {
                let trial_grad = power_gradient(&trial)?;
                let armijo = trial_value <= value - 0.5 * step * gnorm2;
                // below rounding noise in P, fall back to gradient-norm decrease
                let flat = trial_value <= value + 4.0 * f64::EPSILON * value.abs()
                    && trial_grad.iter().map(|g| g * g).sum::<f64>() < gnorm2;
                if armijo || flat {
                    x = trial;
                    value = trial_value;
                    grad = trial_grad;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let max_difference = x
        .iter()
        .zip(&solved.z_c)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MinHeatReport {
        constraint_solution: solved.z_c,
        power_minimizer: x,
        max_difference,
        descent_iterations: iterations,
    })
}
