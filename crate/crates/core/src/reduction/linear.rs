use super::sampling::all_pairs;
use super::{AssumptionCertificate, LawTable, RecoveryMethod, ReducedEdge, ReducedNetwork, ReductionError};
use crate::graph::{graph_from_laplacian, DirectedGraph, LaplacianTolerance};
use crate::laplacian::schur_complement;
use crate::potential::Network;

/// Exact reduction when every law is `g(y) = ḡ·y`: one Schur complement of
/// `D·diag(ḡ)·Dᵀ`, no sampling. Tables are exact straight lines on the
/// common validity interval of the input laws. Without central nodes the
/// original edges (and orientations) are kept.
pub fn reduce_linear(net: &Network) -> Result<ReducedNetwork, ReductionError> {
    let mut conductances = Vec::with_capacity(net.edge_count());
    for (edge, law) in net.laws().iter().enumerate() {
        conductances.push(law.linear_conductance().ok_or(ReductionError::NonLinearLaw { edge })?);
    }
    let lo = net.laws().iter().map(|l| l.interval().lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = net.laws().iter().map(|l| l.interval().hi).fold(f64::INFINITY, f64::min);

    let part = net.partition();
    let names: Vec<String> = part.boundary().iter().map(|&i| net.graph().nodes()[i].clone()).collect();
    let (graph, weights) = if part.central().is_empty() {
        let position = |node: usize| part.boundary().iter().position(|&b| b == node).expect("every node is boundary");
        let edges = net.graph().edges().iter().map(|&(t, h)| (position(t), position(h))).collect();
        (DirectedGraph::new(names, edges)?, conductances)
    } else {
        let l = net.incidence().weighted_laplacian(&conductances);
        let s = schur_complement(&l, part.boundary(), part.central())
            .expect("weighted Laplacian of a connected graph is positive definite on the central block");
        graph_from_laplacian(&s, &names, LaplacianTolerance::default())?
    };

    let edges = weights
        .iter()
        .enumerate()
        .map(|(edge, &w)| {
            let table = LawTable::new(vec![lo, 0.0, hi], vec![w * lo, 0.0, w * hi], Some(vec![w; 3]))
                .map_err(|source| ReductionError::Table { edge, source })?;
            Ok(ReducedEdge { table, exact_weight: Some(w) })
        })
        .collect::<Result<Vec<_>, ReductionError>>()?;

    let pairs = all_pairs(graph.node_count());
    let bitmap = pairs
        .iter()
        .map(|&(i, k)| {
            let linked = graph.edges().iter().any(|&(a, b)| (a, b) == (i, k) || (b, a) == (i, k));
            if linked {
                '1'
            } else {
                '0'
            }
        })
        .collect();
    let certificate = AssumptionCertificate {
        method: RecoveryMethod::ExactLinear,
        samples_used: 0,
        support_stable: true,
        acyclic: graph.is_acyclic(),
        consistency_residual: 0.0,
        relative_residual: 0.0,
        integrability_max_asymmetry: 0.0,
        accepted: true,
        pairs,
        support_bitmaps: vec![bitmap],
    };
    Ok(ReducedNetwork { graph, edges, certificate })
}
