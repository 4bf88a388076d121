//! Kron reduction: reduced Hessians by Schur complement, reduced-graph
//! inference with support certificates, per-edge law recovery, effective
//! two-terminal curves, and the exact linear fast path.
//!
//! The reduced network lives on the boundary nodes (in partition order).
//! Reduced edges are oriented from the lower boundary position to the
//! higher one, so `ŷ = z_B[k] − z_B[i]` for an edge `i → k`.

mod acyclic;
mod curve;
mod cyclic;
mod linear;
mod sampling;
pub mod table;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_incidence, DirectedGraph, GraphError};
use crate::potential::{Network, NetworkError};
use crate::solver::SolveError;

pub use acyclic::recover_edge_laws_acyclic;
pub use curve::{effective_curve, CurvePoint};
pub use cyclic::{integrability_diagnostic, recover_edge_laws_cyclic, CycleSpace};
pub use linear::reduce_linear;
pub use sampling::{infer_reduced_graph, reduced_hessian, SUPPORT_ABS_TOL, SUPPORT_REL_TOL};
pub use table::{LawTable, TableColumns, TableError};

/// Accepted held-out residual for a reduction.
pub const ACCEPT_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("solve failed at boundary sample {z_b:?}: {source}")]
    Solve {
        z_b: Vec<f64>,
        #[source]
        source: SolveError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("sampling plan needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("reduced graph has cycles; use the cyclic recovery")]
    NotAcyclic,
    #[error("reduced edge {edge}: currents {first} and {second} disagree at y = {y}; the reduced law is not a function of its own edge voltage")]
    Inconsistent { edge: usize, y: f64, first: f64, second: f64 },
    #[error("reduced edge {edge}: {source}")]
    Table {
        edge: usize,
        #[source]
        source: TableError,
    },
    #[error("least-squares fit is rank deficient (rank {rank} of {unknowns} unknowns); increase the sample count")]
    RankDeficient { rank: usize, unknowns: usize },
    #[error("fitted law of reduced edge {edge} is not increasing near y = {y}")]
    NonMonotone { edge: usize, y: f64 },
    #[error("edge {edge} is not a linear law g(y) = c·y with c > 0")]
    NonLinearLaw { edge: usize },
    #[error("terminal pair ({a}, {b}) must be two distinct nodes")]
    BadPair { a: usize, b: usize },
}

/// Boundary-potential sampling used to infer and recover the reduced network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Random samples, uniform in `[−range, range]^{n_B}` and gauge-fixed by
    /// subtracting the last component. The all-zero sample is always added.
    pub count: usize,
    pub range: f64,
    pub seed: u64,
    /// Grid resolution per reduced edge for the acyclic tables.
    pub table_points: usize,
    /// Independent samples for the input–output residual.
    pub holdout: usize,
    /// Samples at which the integrability diagnostic is evaluated.
    pub integrability_samples: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { count: 64, range: 2.0, seed: 0x4b52_4f4e, table_points: 129, holdout: 50, integrability_samples: 16 }
    }
}

/// Which procedure produced the edge tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryMethod {
    ExactLinear,
    Acyclic,
    CyclicLeastSquares,
}

/// Evidence gathered for the reduction assumptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCertificate {
    pub method: RecoveryMethod,
    pub samples_used: usize,
    /// All sampled reduced Hessians had the same edge support.
    pub support_stable: bool,
    pub acyclic: bool,
    /// Max over held-out samples of `‖D̂·f(D̂ᵀz_B) − J_B‖∞`.
    pub consistency_residual: f64,
    /// Same, divided by `1 + ‖J_B‖∞` per sample.
    pub relative_residual: f64,
    /// Cycle-space integrability asymmetry; 0 for acyclic reductions.
    pub integrability_max_asymmetry: f64,
    /// Residual below the acceptance threshold and support stable.
    pub accepted: bool,
    /// Boundary-position pairs `(i, k)`, `i < k`, indexing the bitmaps.
    pub pairs: Vec<(usize, usize)>,
    /// One `0`/`1` string per sample over `pairs`.
    pub support_bitmaps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEdge {
    pub table: LawTable,
    /// Exact conductance when every original law is linear.
    pub exact_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    /// Graph on the boundary nodes, in boundary order.
    pub graph: DirectedGraph,
    pub edges: Vec<ReducedEdge>,
    pub certificate: AssumptionCertificate,
}

impl ReducedNetwork {
    fn edge_values<F>(&self, z_b: &[f64], f: F) -> Result<Vec<f64>, ReductionError>
    where
        F: Fn(&LawTable, f64) -> Result<f64, TableError>,
    {
        let y = build_incidence(&self.graph).edge_voltages(z_b);
        y.iter()
            .zip(&self.edges)
            .enumerate()
            .map(|(edge, (&v, e))| f(&e.table, v).map_err(|source| ReductionError::Table { edge, source }))
            .collect()
    }

    /// `D̂·f(D̂ᵀz_B)`.
    pub fn nodal_currents(&self, z_b: &[f64]) -> Result<Vec<f64>, ReductionError> {
        let currents = self.edge_values(z_b, LawTable::current)?;
        Ok(build_incidence(&self.graph).nodal_sum(&currents))
    }

    /// `Σ_j Ĝ_j((D̂ᵀz_B)_j)`.
    pub fn reduced_potential(&self, z_b: &[f64]) -> Result<f64, ReductionError> {
        Ok(self.edge_values(z_b, LawTable::cocontent)?.iter().sum())
    }

    /// `D̂·diag(f'(D̂ᵀz_B))·D̂ᵀ`.
    pub fn laplacian(&self, z_b: &[f64]) -> Result<DMatrix<f64>, ReductionError> {
        let slopes = self.edge_values(z_b, LawTable::slope)?;
        Ok(build_incidence(&self.graph).weighted_laplacian(&slopes))
    }

    /// Recovered differential conductance of every edge at `ŷ = 0`.
    pub fn slopes_at_zero(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.table.slope(0.0).unwrap_or(f64::NAN)).collect()
    }
}

/// Per-sample residual bookkeeping shared by the recoveries.
pub(crate) fn holdout_residuals(
    reduced: &ReducedNetwork,
    samples: &[sampling::BoundarySample],
) -> Result<(f64, f64), ReductionError> {
    let mut absolute: f64 = 0.0;
    let mut relative: f64 = 0.0;
    for s in samples {
        let predicted = reduced.nodal_currents(&s.z_b)?;
        let r = predicted.iter().zip(&s.j_b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = 1.0 + s.j_b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        absolute = absolute.max(r);
        relative = relative.max(r / scale);
    }
    Ok((absolute, relative))
}

/// Full sampling pipeline: infer the reduced graph, then recover laws with
/// the acyclic or cyclic procedure. For all-linear inputs the exact
/// conductances are attached to the matching reduced edges.
pub fn reduce(net: &Network, plan: &SamplingPlan) -> Result<ReducedNetwork, ReductionError> {
    let samples = sampling::collect(net, &sampling::plan_samples(plan, net.partition().boundary().len()))?;
    let (graph, certificate) = sampling::infer_from_samples(net, &samples)?;
    let mut reduced = if graph.is_acyclic() {
        acyclic::recover(net, &graph, plan, samples, certificate)?
    } else {
        let mut r = cyclic::recover(net, &graph, plan, samples, certificate)?;
        r.certificate.integrability_max_asymmetry = cyclic::integrability_diagnostic(net, &r, plan)?;
        r
    };
    if net.laws().iter().all(|l| l.linear_conductance().is_some()) {
        let exact = linear::reduce_linear(net)?;
        for (edge, &pair) in reduced.edges.iter_mut().zip(reduced.graph.edges()) {
            edge.exact_weight = exact
                .graph
                .edges()
                .iter()
                .position(|&p| p == pair)
                .and_then(|k| exact.edges[k].exact_weight);
        }
    }
    Ok(reduced)
}
