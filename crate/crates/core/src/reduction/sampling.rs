use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AssumptionCertificate, RecoveryMethod, ReductionError, SamplingPlan};
use crate::graph::DirectedGraph;
use crate::potential::Network;
use crate::solver::{solve_with_reduced_hessian, SolveResult};

pub const SUPPORT_ABS_TOL: f64 = 1e-10;
pub const SUPPORT_REL_TOL: f64 = 1e-9;

const HOLDOUT_STREAM: u64 = 0x686f_6c64;

/// One eliminated boundary configuration.
#[derive(Debug, Clone)]
pub(crate) struct BoundarySample {
    pub z_b: Vec<f64>,
    pub j_b: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

fn random_samples(count: usize, range: f64, n_b: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut z: Vec<f64> = (0..n_b).map(|_| rng.gen_range(-range..=range)).collect();
            let last = z[n_b - 1];
            z.iter_mut().for_each(|v| *v -= last);
            z
        })
        .collect()
}

/// The zero sample followed by `plan.count` random gauge-fixed samples.
pub(crate) fn plan_samples(plan: &SamplingPlan, n_b: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n_b]];
    out.extend(random_samples(plan.count, plan.range, n_b, plan.seed));
    out
}

pub(crate) fn holdout_samples(plan: &SamplingPlan, n_b: usize) -> Vec<Vec<f64>> {
    random_samples(plan.holdout, plan.range, n_b, plan.seed ^ HOLDOUT_STREAM)
}

fn eliminate(net: &Network, z_b: &[f64]) -> Result<(SolveResult, DMatrix<f64>), ReductionError> {
    solve_with_reduced_hessian(net, z_b).map_err(|source| ReductionError::Solve { z_b: z_b.to_vec(), source })
}

/// Solves every sample (in parallel) and keeps the first failure in sample order.
pub(crate) fn collect(net: &Network, zs: &[Vec<f64>]) -> Result<Vec<BoundarySample>, ReductionError> {
    let results: Vec<_> = zs
        .par_iter()
        .map(|z_b| {
            eliminate(net, z_b).map(|(solved, hessian)| BoundarySample { z_b: z_b.clone(), j_b: solved.j_b, hessian })
        })
        .collect();
    results.into_iter().collect()
}

/// Schur complement of `∂²K/∂z²` onto the boundary at the interior solution.
pub fn reduced_hessian(net: &Network, z_b: &[f64]) -> Result<DMatrix<f64>, ReductionError> {
    Ok(eliminate(net, z_b)?.1)
}

fn support(h: &DMatrix<f64>, pairs: &[(usize, usize)]) -> Vec<bool> {
    let max_diag = (0..h.nrows()).map(|i| h[(i, i)]).fold(0.0, f64::max);
    let threshold = SUPPORT_ABS_TOL + SUPPORT_REL_TOL * max_diag;
    pairs.iter().map(|&(i, k)| h[(i, k)].abs() > threshold).collect()
}

pub(crate) fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |k| (i, k))).collect()
}

pub(crate) fn infer_from_samples(
    net: &Network,
    samples: &[BoundarySample],
) -> Result<(DirectedGraph, AssumptionCertificate), ReductionError> {
    let n_b = net.partition().boundary().len();
    let pairs = all_pairs(n_b);
    let supports: Vec<Vec<bool>> = samples.iter().map(|s| support(&s.hessian, &pairs)).collect();
    let union: Vec<bool> = (0..pairs.len()).map(|p| supports.iter().any(|s| s[p])).collect();
    let support_stable = supports.windows(2).all(|w| w[0] == w[1]);
    let names: Vec<String> = net.partition().boundary().iter().map(|&i| net.graph().nodes()[i].clone()).collect();
    let edges: Vec<(usize, usize)> = pairs.iter().zip(&union).filter(|(_, &u)| u).map(|(&p, _)| p).collect();
    let graph = DirectedGraph::new(names, edges)?;
    let certificate = AssumptionCertificate {
        method: if graph.is_acyclic() { RecoveryMethod::Acyclic } else { RecoveryMethod::CyclicLeastSquares },
        samples_used: samples.len(),
        support_stable,
        acyclic: graph.is_acyclic(),
        consistency_residual: 0.0,
        relative_residual: 0.0,
        integrability_max_asymmetry: 0.0,
        accepted: false,
        pairs,
        support_bitmaps: supports
            .iter()
            .map(|s| s.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect(),
    };
    Ok((graph, certificate))
}

/// Reduced edge support from the sampled Schur complements. The returned
/// graph carries the union support; `support_stable` records whether every
/// sample agreed.
pub fn infer_reduced_graph(
    net: &Network,
    plan: &SamplingPlan,
) -> Result<(DirectedGraph, AssumptionCertificate), ReductionError> {
    if plan.count < 2 {
        return Err(ReductionError::TooFewSamples(plan.count));
    }
    let samples = collect(net, &plan_samples(plan, net.partition().boundary().len()))?;
    infer_from_samples(net, &samples)
}
