//! Best-effort law recovery when the reduced graph has cycles.
//!
//! Per sample the edge currents are only fixed up to `ker D̂`, so the laws
//! are fitted jointly: each reduced edge gets a C¹ piecewise-cubic Hermite
//! function with knots at data quantiles on either side of `0`, and all
//! knot values and slopes are chosen by least squares over
//! `Σ_samples ‖D̂·f(D̂ᵀz_B) − J_B(z_B)‖²`. The value at `0` is pinned to the
//! minimum-norm solution of `D̂·c = J_B(0)`.
//!
//! Besides the random plan samples, every reduced edge `i → k` is swept
//! with `z_k − z_i` over the full table range (other potentials at 0) so
//! that the outer knots are supported by data.

use nalgebra::{DMatrix, DVector};

use super::sampling::{self, BoundarySample};
use super::{
    acyclic, holdout_residuals, AssumptionCertificate, LawTable, RecoveryMethod, ReducedEdge, ReducedNetwork,
    ReductionError, SamplingPlan, ACCEPT_RESIDUAL,
};
use crate::graph::{build_incidence, DirectedGraph};
use crate::potential::Network;

const RANK_TOL: f64 = 1e-11;
const MAX_KNOTS_PER_SIDE: usize = 8;
const MIN_KNOT_GAP: f64 = 1e-3;
const FD_STEP: f64 = 1e-3;

/// Columns of `F` span `ker D̂`: one fundamental cycle per chord of a
/// spanning tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpace {
    pub f: DMatrix<f64>,
    /// Chord edge closing each cycle (column order).
    pub chords: Vec<usize>,
}

impl CycleSpace {
    pub fn new(graph: &DirectedGraph) -> CycleSpace {
        let (f, chords) = graph.fundamental_cycles();
        CycleSpace { f, chords }
    }

    pub fn dimension(&self) -> usize {
        self.chords.len()
    }
}

/// Hermite knots of one reduced edge. The value at the `0` knot is pinned.
struct EdgeBasis {
    knots: Vec<f64>,
    pinned: f64,
    /// Column of each free value (None at the anchor) and of each slope.
    value_col: Vec<Option<usize>>,
    slope_col: Vec<usize>,
}

fn side_knots(mut magnitudes: Vec<f64>, per_side: usize, reach: f64) -> Vec<f64> {
    magnitudes.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::new();
    let n = magnitudes.len();
    if n > 0 {
        for i in 1..per_side {
            let q = magnitudes[(i * n / per_side).min(n - 1)];
            if q > out.last().copied().unwrap_or(0.0) + MIN_KNOT_GAP && q < reach - MIN_KNOT_GAP {
                out.push(q);
            }
        }
    }
    out.push(reach);
    out
}

impl EdgeBasis {
    fn new(data: &[f64], per_side: usize, reach: f64, pinned: f64, next_col: &mut usize) -> EdgeBasis {
        let neg = side_knots(data.iter().filter(|&&v| v < 0.0).map(|v| -v).collect(), per_side, reach);
        let pos = side_knots(data.iter().filter(|&&v| v > 0.0).copied().collect(), per_side, reach);
        let mut knots: Vec<f64> = neg.iter().rev().map(|v| -v).collect();
        let anchor = knots.len();
        knots.push(0.0);
        knots.extend(pos);
        let mut value_col = Vec::with_capacity(knots.len());
        let mut slope_col = Vec::with_capacity(knots.len());
        for k in 0..knots.len() {
            if k == anchor {
                value_col.push(None);
            } else {
                value_col.push(Some(*next_col));
                *next_col += 1;
            }
            slope_col.push(*next_col);
            *next_col += 1;
        }
        EdgeBasis { knots, pinned, value_col, slope_col }
    }

    /// Coefficients `(column, weight)` of `f(v)` in the unknowns, plus the
    /// constant contributed by the pinned value.
    fn row(&self, v: f64) -> (Vec<(usize, f64)>, f64) {
        let last = self.knots.len() - 1;
        let k = match self.knots.partition_point(|&x| x <= v) {
            0 => 0,
            p => (p - 1).min(last - 1),
        };
        let h = self.knots[k + 1] - self.knots[k];
        let t = (v - self.knots[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let weights = [
            (k, 2.0 * t3 - 3.0 * t2 + 1.0, (t3 - 2.0 * t2 + t) * h),
            (k + 1, -2.0 * t3 + 3.0 * t2, (t3 - t2) * h),
        ];
        let mut coeffs = Vec::with_capacity(4);
        let mut constant = 0.0;
        for (knot, wv, ws) in weights {
            match self.value_col[knot] {
                Some(col) => coeffs.push((col, wv)),
                None => constant += wv * self.pinned,
            }
            coeffs.push((self.slope_col[knot], ws));
        }
        (coeffs, constant)
    }
}

fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    m.clone().pseudo_inverse(1e-12).expect("pseudo-inverse with non-negative epsilon")
}

fn fit(
    graph: &DirectedGraph,
    plan: &SamplingPlan,
    samples: &[BoundarySample],
) -> Result<Vec<ReducedEdge>, ReductionError> {
    let m = graph.edge_count();
    let n_b = graph.node_count();
    let incidence = build_incidence(graph);
    let d = incidence.to_dense();
    let reach = 2.0 * plan.range;

    // pinned values at 0 from the zero sample (minimum-norm in ker D̂)
    let zero = samples.iter().find(|s| s.z_b.iter().all(|&v| v == 0.0));
    let pinned = match zero {
        Some(s) => pseudo_inverse(&d) * DVector::from_column_slice(&s.j_b),
        None => DVector::zeros(m),
    };

    let voltages: Vec<Vec<f64>> = samples.iter().map(|s| incidence.edge_voltages(&s.z_b)).collect();
    let equations = samples.len() * n_b.saturating_sub(1);
    let per_edge_budget = equations / (2 * m.max(1));
    let per_side = (per_edge_budget.saturating_sub(1) / 4).clamp(1, MAX_KNOTS_PER_SIDE);

    let mut cols = 0;
    let bases: Vec<EdgeBasis> = (0..m)
        .map(|j| {
            let data: Vec<f64> = voltages.iter().map(|y| y[j]).collect();
            EdgeBasis::new(&data, per_side, reach, pinned[j], &mut cols)
        })
        .collect();

    let rows = samples.len() * n_b;
    let mut a = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    for (s, (sample, y)) in samples.iter().zip(&voltages).enumerate() {
        for b in 0..n_b {
            rhs[s * n_b + b] = sample.j_b[b];
        }
        for (j, &(tail, head)) in graph.edges().iter().enumerate() {
            let (coeffs, constant) = bases[j].row(y[j]);
            for (node, sign) in [(head, 1.0), (tail, -1.0)] {
                let r = s * n_b + node;
                rhs[r] -= sign * constant;
                for &(c, w) in &coeffs {
                    a[(r, c)] += sign * w;
                }
            }
        }
    }

    // the tall system is compressed by QR first; R has the same singular values
    let qr = a.qr();
    qr.q_tr_mul(&mut rhs);
    let rhs = rhs.rows(0, cols.min(rows)).into_owned();
    let svd = qr.r().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if rank < cols {
        return Err(ReductionError::RankDeficient { rank, unknowns: cols });
    }
    let x = svd.solve(&rhs, 0.0).expect("SVD computed with both factors");

    bases
        .iter()
        .enumerate()
        .map(|(edge, basis)| {
            let values: Vec<f64> = (0..basis.knots.len())
                .map(|k| basis.value_col[k].map_or(basis.pinned, |c| x[c]))
                .collect();
            let slopes: Vec<f64> = basis.slope_col.iter().map(|&c| x[c]).collect();
            for k in 1..basis.knots.len() {
                if !(values[k] > values[k - 1]) {
                    return Err(ReductionError::NonMonotone { edge, y: basis.knots[k] });
                }
            }
            // increasing values with a non-positive fitted slope: keep the
            // values and fall back to shape-preserving slope estimates
            let slopes = slopes.iter().all(|&m| m > 0.0 && m.is_finite()).then_some(slopes);
            let table = LawTable::new(basis.knots.clone(), values, slopes)
                .map_err(|source| ReductionError::Table { edge, source })?;
            Ok(ReducedEdge { table, exact_weight: None })
        })
        .collect()
}

pub(crate) fn recover(
    net: &Network,
    graph: &DirectedGraph,
    plan: &SamplingPlan,
    samples: Vec<BoundarySample>,
    mut certificate: AssumptionCertificate,
) -> Result<ReducedNetwork, ReductionError> {
    if graph.is_acyclic() {
        // ker D̂ = 0: every sample pins the edge currents exactly
        return acyclic::recover(net, graph, plan, samples, certificate);
    }
    let reach = 2.0 * plan.range;
    let sweep_points = (plan.table_points / 4).max(2) + 1;
    let mut sweeps = Vec::with_capacity(graph.edge_count() * sweep_points);
    for &(tail, head) in graph.edges() {
        for k in 0..sweep_points {
            let t = -reach + 2.0 * reach * k as f64 / (sweep_points - 1) as f64;
            let mut z = vec![0.0; graph.node_count()];
            z[head] = 0.5 * t;
            z[tail] = -0.5 * t;
            sweeps.push(z);
        }
    }
    let mut samples = samples;
    samples.extend(sampling::collect(net, &sweeps)?);
    let edges = fit(graph, plan, &samples)?;
    certificate.method = RecoveryMethod::CyclicLeastSquares;
    certificate.acyclic = false;
    let mut reduced = ReducedNetwork { graph: graph.clone(), edges, certificate };
    let holdout = sampling::collect(net, &sampling::holdout_samples(plan, graph.node_count()))?;
    let (absolute, relative) = holdout_residuals(&reduced, &holdout)?;
    let cert = &mut reduced.certificate;
    cert.consistency_residual = absolute;
    cert.relative_residual = relative;
    cert.accepted = cert.support_stable && absolute <= ACCEPT_RESIDUAL;
    Ok(reduced)
}

/// Jointly fits one monotone law per reduced edge when `D̂` may have
/// cycles. The result is flagged (not an error) when the held-out residual
/// exceeds the acceptance threshold. Acyclic graphs take the exact
/// per-sample route and give the same tables as
/// [`recover_edge_laws_acyclic`](super::recover_edge_laws_acyclic).
pub fn recover_edge_laws_cyclic(
    net: &Network,
    dhat: &DirectedGraph,
    plan: &SamplingPlan,
) -> Result<ReducedNetwork, ReductionError> {
    if plan.count < 2 {
        return Err(ReductionError::TooFewSamples(plan.count));
    }
    let samples = sampling::collect(net, &sampling::plan_samples(plan, net.partition().boundary().len()))?;
    let (_, certificate) = sampling::infer_from_samples(net, &samples)?;
    recover(net, dhat, plan, samples, certificate)
}

fn cycle_correction(
    reduced: &ReducedNetwork,
    f_pinv: &DMatrix<f64>,
    hessian: &DMatrix<f64>,
    z_b: &[f64],
) -> Result<DMatrix<f64>, ReductionError> {
    let y = build_incidence(&reduced.graph).edge_voltages(z_b);
    let mut r = DMatrix::zeros(y.len(), y.len());
    for (j, &(tail, head)) in reduced.graph.edges().iter().enumerate() {
        let fitted = reduced.edges[j]
            .table
            .slope(y[j])
            .map_err(|source| ReductionError::Table { edge: j, source })?;
        r[(j, j)] = -hessian[(tail, head)] - fitted;
    }
    Ok(f_pinv * r * f_pinv.transpose())
}

/// Largest violation of the integrability (symmetric mixed partials)
/// condition of the cycle-space correction `S(ŷ)`.
///
/// At each sample, `R = Ŵ − diag(f'(ŷ))` uses the Schur weights `Ŵ` and the
/// fitted slopes, `S = F⁺·R·F⁺ᵀ`, and `∂S/∂z_B` comes from central
/// differences of boundary potentials. Since `ŷ = D̂ᵀz_B` only moves inside
/// `im D̂ᵀ`, `∂S/∂ŷ` is taken as the minimum-norm preimage `D̂⁺·∂S/∂z_B`;
/// cycle indices refer to their chord coordinates. Returns 0 for acyclic
/// reductions.
pub fn integrability_diagnostic(
    net: &Network,
    reduced: &ReducedNetwork,
    plan: &SamplingPlan,
) -> Result<f64, ReductionError> {
    let cycles = CycleSpace::new(&reduced.graph);
    let r = cycles.dimension();
    if r == 0 {
        return Ok(0.0);
    }
    let n_b = reduced.graph.node_count();
    let f_pinv = pseudo_inverse(&cycles.f);
    let d_pinv = pseudo_inverse(&build_incidence(&reduced.graph).to_dense());
    let centers: Vec<Vec<f64>> =
        sampling::plan_samples(plan, n_b).into_iter().take(plan.integrability_samples.max(1)).collect();

    let mut perturbed = Vec::with_capacity(centers.len() * 2 * n_b);
    for z in &centers {
        for b in 0..n_b {
            for sign in [1.0, -1.0] {
                let mut p = z.clone();
                p[b] += sign * FD_STEP;
                perturbed.push(p);
            }
        }
    }
    let solved = sampling::collect(net, &perturbed)?;

    let mut worst: f64 = 0.0;
    for (c, _) in centers.iter().enumerate() {
        // dS[b] = ∂S/∂z_b
        let mut ds = Vec::with_capacity(n_b);
        for b in 0..n_b {
            let plus = &solved[(c * n_b + b) * 2];
            let minus = &solved[(c * n_b + b) * 2 + 1];
            let sp = cycle_correction(reduced, &f_pinv, &plus.hessian, &plus.z_b)?;
            let sm = cycle_correction(reduced, &f_pinv, &minus.hessian, &minus.z_b)?;
            ds.push((sp - sm) / (2.0 * FD_STEP));
        }
        // grad[i][j] = ∂S_ij/∂ŷ (length m̂)
        let grad = |i: usize, j: usize| -> DVector<f64> {
            let dz = DVector::from_iterator(n_b, ds.iter().map(|m| m[(i, j)]));
            &d_pinv * dz
        };
        for i in 0..r {
            for j in 0..r {
                let gij = grad(i, j);
                for k in 0..r {
                    let gkj = grad(k, j);
                    worst = worst.max((gij[cycles.chords[k]] - gkj[cycles.chords[i]]).abs());
                }
            }
        }
    }
    Ok(worst)
}
