//! Law recovery when the reduced graph is a tree: every sample determines
//! the reduced edge currents uniquely from `D̂·Î = J_B`.

use std::collections::VecDeque;

use nalgebra::DVector;

use super::sampling::{self, BoundarySample};
use super::{
    holdout_residuals, AssumptionCertificate, LawTable, RecoveryMethod, ReducedEdge, ReducedNetwork, ReductionError,
    SamplingPlan, ACCEPT_RESIDUAL,
};
use crate::graph::{build_incidence, DirectedGraph};
use crate::potential::Network;

/// Points closer than this are merged after a consistency check.
const MERGE_GAP: f64 = 1e-6;
const CONSISTENCY_TOL: f64 = 1e-7;

/// Boundary potentials realizing edge voltages `y` on a tree, with the last
/// node grounded.
pub(crate) fn tree_potentials(graph: &DirectedGraph, y: &[f64]) -> Vec<f64> {
    let n = graph.node_count();
    let mut adj = vec![Vec::new(); n];
    for (j, &(t, h)) in graph.edges().iter().enumerate() {
        adj[t].push((h, y[j]));
        adj[h].push((t, -y[j]));
    }
    let mut z = vec![0.0; n];
    let mut seen = vec![false; n];
    let root = n - 1;
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, dy) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                z[v] = z[u] + dy;
                queue.push_back(v);
            }
        }
    }
    z
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

struct Pooled {
    y: f64,
    current: f64,
    slope: f64,
}

fn build_table(edge: usize, mut points: Vec<Pooled>) -> Result<LawTable, ReductionError> {
    points.sort_by(|a, b| a.y.total_cmp(&b.y));
    let mut kept: Vec<Pooled> = Vec::with_capacity(points.len());
    for p in points {
        if let Some(last) = kept.last() {
            let gap = p.y - last.y;
            if gap <= MERGE_GAP {
                if (p.current - last.current - last.slope * gap).abs() > CONSISTENCY_TOL {
                    return Err(ReductionError::Inconsistent { edge, y: p.y, first: last.current, second: p.current });
                }
                continue;
            }
        }
        kept.push(p);
    }
    let y = kept.iter().map(|p| p.y).collect();
    let current = kept.iter().map(|p| p.current).collect();
    let slope = kept.iter().map(|p| p.slope).collect();
    LawTable::new(y, current, Some(slope)).map_err(|source| ReductionError::Table { edge, source })
}

pub(crate) fn recover(
    net: &Network,
    graph: &DirectedGraph,
    plan: &SamplingPlan,
    mut samples: Vec<BoundarySample>,
    mut certificate: AssumptionCertificate,
) -> Result<ReducedNetwork, ReductionError> {
    if !graph.is_acyclic() {
        return Err(ReductionError::NotAcyclic);
    }
    let m = graph.edge_count();
    let reach = 2.0 * plan.range;
    let mut grid_points = Vec::with_capacity(m * plan.table_points);
    for j in 0..m {
        for t in linspace(-reach, reach, plan.table_points) {
            let mut y = vec![0.0; m];
            y[j] = t;
            grid_points.push(tree_potentials(graph, &y));
        }
    }
    samples.extend(sampling::collect(net, &grid_points)?);

    let incidence = build_incidence(graph);
    let d = incidence.to_dense();
    let normal = d.transpose() * &d;
    let chol = normal.cholesky();
    let mut pooled: Vec<Vec<Pooled>> = (0..m).map(|_| Vec::new()).collect();
    for s in &samples {
        let y = incidence.edge_voltages(&s.z_b);
        let currents = match &chol {
            Some(c) => c.solve(&(d.transpose() * DVector::from_column_slice(&s.j_b))),
            None => DVector::zeros(0),
        };
        for (j, &(tail, head)) in graph.edges().iter().enumerate() {
            pooled[j].push(Pooled { y: y[j], current: currents[j], slope: -s.hessian[(tail, head)] });
        }
    }
    let edges = pooled
        .into_iter()
        .enumerate()
        .map(|(j, pts)| build_table(j, pts).map(|table| ReducedEdge { table, exact_weight: None }))
        .collect::<Result<Vec<_>, _>>()?;

    certificate.method = RecoveryMethod::Acyclic;
    certificate.acyclic = true;
    let mut reduced = ReducedNetwork { graph: graph.clone(), edges, certificate };
    let holdout = sampling::collect(net, &sampling::holdout_samples(plan, graph.node_count()))?;
    let (absolute, relative) = holdout_residuals(&reduced, &holdout)?;
    let cert = &mut reduced.certificate;
    cert.consistency_residual = absolute;
    cert.relative_residual = relative;
    cert.integrability_max_asymmetry = 0.0;
    cert.accepted = cert.support_stable && relative <= ACCEPT_RESIDUAL;
    Ok(reduced)
}

/// Recovers one monotone law table per reduced edge when `D̂` has no cycles.
///
/// Random samples certify that each edge current depends only on its own
/// voltage; an additional grid of `plan.table_points` voltages per edge
/// fills the table. Knot slopes are the Schur-complement weights.
pub fn recover_edge_laws_acyclic(
    net: &Network,
    dhat: &DirectedGraph,
    plan: &SamplingPlan,
) -> Result<ReducedNetwork, ReductionError> {
    if plan.count < 2 {
        return Err(ReductionError::TooFewSamples(plan.count));
    }
    if !dhat.is_acyclic() {
        return Err(ReductionError::NotAcyclic);
    }
    let samples = sampling::collect(net, &sampling::plan_samples(plan, net.partition().boundary().len()))?;
    let (_, certificate) = sampling::infer_from_samples(net, &samples)?;
    recover(net, dhat, plan, samples, certificate)
}
