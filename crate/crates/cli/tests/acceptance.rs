//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned here; oracles are closed forms or
//! independent computations, never the code under test.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kronred::graph::NodePartition;
use kronred::laplacian::LaplacianStructure;
use kronred::potential::{self, min_heat_check, MinHeatError};
use kronred::reduction::{effective_curve, infer_reduced_graph, recover_edge_laws_cyclic, reduce_linear};
use kronred::solver::{reduced_potential, sensitivity, solve_interior};
use kronred::{fixtures, reduce, DirectedGraph, EdgeLaw, Network, ReducedNetwork, SamplingPlan};
use kronred_cli::format::load_network;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MIXED_LAWS: &[&str] = &["exp(y) - 1", "2*y + sinh(y)", "tanh(y) + 0.5*y", "y + y^3", "3*y", "y + 0.5*y^3"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn inf(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Random connected network: a random tree plus extra simple edges, random
/// orientations, boundary a shuffled subset leaving at least one central node.
fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize, linear: bool) -> Network {
    let n = rng.gen_range(3..=max_nodes);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push(if rng.gen_bool(0.5) { (i, j) } else { (j, i) });
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !edges.iter().any(|&e| e == (a, b) || e == (b, a)) {
            edges.push((a, b));
        }
    }
    let laws = edges
        .iter()
        .map(|_| {
            let text = if linear {
                format!("{:.6}*y", rng.gen_range(0.5..3.0))
            } else {
                MIXED_LAWS[rng.gen_range(0..MIXED_LAWS.len())].to_string()
            };
            EdgeLaw::conductance(&text).unwrap()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let boundary = order[..rng.gen_range(2..n)].to_vec();
    let graph = DirectedGraph::new((0..n).map(|i| format!("n{i}")).collect(), edges).unwrap();
    Network::new(graph, laws, NodePartition::new(n, boundary).unwrap()).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, range: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-range..range)).collect()
}

fn criterion_1() -> Outcome {
    let net = fixtures::diode_pair_opposite();
    let grid: Vec<f64> = (0..41).map(|i| -3.0 + 0.15 * i as f64).collect();
    let start = Instant::now();
    let curve = effective_curve(&net, 1, 2, &grid).unwrap();
    let elapsed = start.elapsed();
    let err = curve.iter().map(|p| (p.current - (0.5 * p.v).tanh()).abs()).fold(0.0, f64::max);
    let ok = curve.iter().all(|p| p.error.is_none()) && err <= 1e-8 && elapsed < Duration::from_secs(1);
    outcome(ok, format!("max |I - tanh(V/2)| = {err:.2e} over 41 points (tol 1e-8), {elapsed:.2?} (limit 1 s)"))
}

fn criterion_2() -> Outcome {
    let net = fixtures::diode_pair_same();
    let grid: Vec<f64> = (0..41).map(|i| -3.0 + 0.15 * i as f64).collect();
    let curve = effective_curve(&net, 2, 1, &grid).unwrap();
    let err = curve.iter().map(|p| (p.current - ((0.5 * p.v).exp() - 1.0)).abs()).fold(0.0, f64::max);
    outcome(err <= 1e-8, format!("max |I - (e^(V/2) - 1)| = {err:.2e} over 41 points (tol 1e-8)"))
}

fn criterion_3() -> Outcome {
    let net = fixtures::diode_pair_opposite();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let (z1, z2): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let z0 = solve_interior(&net, &[z1, z2], None).unwrap().z_c[0];
        let oracle = -((-z1).exp() + (-z2).exp()).ln() + 2f64.ln();
        err = err.max((z0 - oracle).abs());
    }
    outcome(err <= 1e-9, format!("max |z0 - closed form| = {err:.2e} at 100 points (tol 1e-9)"))
}

fn criterion_4() -> Outcome {
    let net = fixtures::diode_pair_opposite();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut offsets = Vec::new();
    for _ in 0..100 {
        let (z1, z2): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let k = reduced_potential(&net, &[z1, z2]).unwrap();
        let closed = 2.0 * ((-z1).exp() + (-z2).exp()).ln() + z1 + z2 + 2.0 - 2.0 * 2f64.ln();
        offsets.push(closed - k);
    }
    let spread = offsets.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - offsets.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let err = offsets.iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
    outcome(
        err <= 1e-9 && spread <= 1e-9,
        format!("max |K^ - (closed form - 2)| = {err:.2e}, offset spread {spread:.2e} at 100 points (tol 1e-9)"),
    )
}

/// Eliminates central nodes one at a time from a dense copy of the
/// Laplacian; returns the boundary-by-boundary result.
fn eliminate(net: &Network) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let mut l = vec![vec![0.0; n]; n];
    for (j, &(tail, head)) in net.graph().edges().iter().enumerate() {
        let w = net.laws()[j].slope(0.0).unwrap();
        l[tail][tail] += w;
        l[head][head] += w;
        l[tail][head] -= w;
        l[head][tail] -= w;
    }
    for &c in net.partition().central() {
        let pivot = l[c][c];
        for i in 0..n {
            for k in 0..n {
                if i != c && k != c {
                    l[i][k] -= l[i][c] * l[c][k] / pivot;
                }
            }
        }
        for row in l.iter_mut() {
            row[c] = 0.0;
        }
        l[c].fill(0.0);
    }
    let b = net.partition().boundary();
    b.iter().map(|&i| b.iter().map(|&k| l[i][k]).collect()).collect()
}

fn edge_weights(reduced: &ReducedNetwork, weights: &[f64]) -> Vec<((usize, usize), f64)> {
    let mut pairs: Vec<_> = reduced.graph.edges().iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    pairs
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let (mut support_mismatch, mut weight_err, mut oracle_err, mut structure): (usize, f64, f64, f64) = (0, 0.0, 0.0, 0.0);
    let mut sizes = 0;
    for _ in 0..50 {
        let net = random_network(&mut rng, 12, true);
        sizes = sizes.max(net.node_count());
        let sampled = reduce(&net, &SamplingPlan::default()).unwrap();
        let exact = reduce_linear(&net).unwrap();
        let exact_w: Vec<f64> = exact.edges.iter().map(|e| e.exact_weight.unwrap()).collect();
        let a = edge_weights(&sampled, &sampled.slopes_at_zero());
        let b = edge_weights(&exact, &exact_w);
        if a.iter().map(|p| p.0).ne(b.iter().map(|p| p.0)) {
            support_mismatch += 1;
            continue;
        }
        for (x, y) in a.iter().zip(&b) {
            weight_err = weight_err.max((x.1 - y.1).abs());
        }
        let brute = eliminate(&net);
        for &((i, k), w) in &b {
            oracle_err = oracle_err.max((w + brute[i][k]).abs());
        }
        let z_b = random_vec(&mut rng, net.partition().boundary().len(), 1.0);
        for r in [&sampled, &exact] {
            for z in [vec![0.0; z_b.len()], z_b.clone()] {
                let s = LaplacianStructure::measure(&r.laplacian(&z).unwrap());
                let worst = s.symmetry_gap.max(s.max_abs_row_sum).max(s.max_off_diagonal).max(-s.min_eigenvalue);
                structure = structure.max(worst);
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = support_mismatch == 0
        && weight_err <= 1e-7
        && oracle_err <= 1e-9
        && structure <= 1e-9
        && elapsed < Duration::from_secs(30);
    outcome(
        ok,
        format!(
            "50 graphs (n <= {sizes}): {support_mismatch} support mismatches, max weight gap {weight_err:.2e} (tol 1e-7), \
             exact vs elimination {oracle_err:.2e}, worst structure violation {structure:.2e} (tol 1e-9), {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-5;
    let (mut grad, mut hess): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let net = random_network(&mut rng, 8, false);
        let n = net.node_count();
        let z = random_vec(&mut rng, n, 1.0);
        let j = potential::nodal_currents(&net, &z).unwrap();
        let l = potential::weighted_laplacian(&net, &z).unwrap();
        let mut fd_j = vec![0.0; n];
        let mut fd_l = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            fd_j[i] = (potential::k_value(&net, &zp).unwrap() - potential::k_value(&net, &zm).unwrap()) / (2.0 * h);
            let jp = potential::nodal_currents(&net, &zp).unwrap();
            let jm = potential::nodal_currents(&net, &zm).unwrap();
            for k in 0..n {
                fd_l[k][i] = (jp[k] - jm[k]) / (2.0 * h);
            }
        }
        grad = grad.max(max_abs_diff(&j, &fd_j) / inf(&j).max(1.0));
        let scale = l.amax().max(1.0);
        for i in 0..n {
            for k in 0..n {
                hess = hess.max((l[(i, k)] - fd_l[i][k]).abs() / scale);
            }
        }
    }
    outcome(
        grad <= 1e-6 && hess <= 1e-5,
        format!("100 (network, z): gradient rel. error {grad:.2e} (tol 1e-6), Hessian rel. error {hess:.2e} (tol 1e-5)"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-4;
    let (mut shift, mut envelope): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let net = random_network(&mut rng, 8, false);
        let n_b = net.partition().boundary().len();
        let z_b = random_vec(&mut rng, n_b, 1.0);
        let k = reduced_potential(&net, &z_b).unwrap();
        let c = rng.gen_range(-10.0..10.0);
        let shifted: Vec<f64> = z_b.iter().map(|v| v + c).collect();
        shift = shift.max((reduced_potential(&net, &shifted).unwrap() - k).abs() / (1.0 + k.abs()));
        let j_b = solve_interior(&net, &z_b, None).unwrap().j_b;
        let fd: Vec<f64> = (0..n_b)
            .map(|i| {
                let mut p = z_b.clone();
                let mut m = z_b.clone();
                p[i] += h;
                m[i] -= h;
                (reduced_potential(&net, &p).unwrap() - reduced_potential(&net, &m).unwrap()) / (2.0 * h)
            })
            .collect();
        envelope = envelope.max(max_abs_diff(&fd, &j_b) / inf(&j_b).max(1.0));
    }
    outcome(
        shift <= 1e-9 && envelope <= 1e-5,
        format!("50 (network, z_B): shift gap {shift:.2e} (tol 1e-9 (1+|K^|)), gradient of K^ vs J_B {envelope:.2e} (tol 1e-5)"),
    )
}

/// Max of `‖D̂·f(D̂ᵀz_B) − J_B‖∞ / (1 + ‖J_B‖∞)` over fresh boundary samples.
fn io_residual(net: &Network, reduced: &ReducedNetwork, seed: u64, relative: bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_b = net.partition().boundary().len();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut z_b = random_vec(&mut rng, n_b, 1.9);
        z_b[n_b - 1] = 0.0;
        let j_b = solve_interior(net, &z_b, None).unwrap().j_b;
        let got = reduced.nodal_currents(&z_b).unwrap();
        let scale = if relative { 1.0 + inf(&j_b) } else { 1.0 };
        worst = worst.max(max_abs_diff(&got, &j_b) / scale);
    }
    worst
}

fn criterion_8() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    let mut checked = Vec::new();
    let mut worst: f64 = 0.0;
    let mut accepted = true;
    for path in &files {
        let (net, _) = load_network(path).unwrap();
        let reduced = reduce(&net, &SamplingPlan::default()).unwrap();
        if !reduced.certificate.acyclic {
            continue;
        }
        accepted &= reduced.certificate.accepted;
        worst = worst.max(io_residual(&net, &reduced, 8, true));
        checked.push(path.file_stem().unwrap().to_string_lossy().into_owned());
    }
    let triangle = fixtures::quadratic_cyclic_triangle();
    let plan = SamplingPlan::default();
    let (dhat, _) = infer_reduced_graph(&triangle, &plan).unwrap();
    let cyclic = recover_edge_laws_cyclic(&triangle, &dhat, &plan).unwrap();
    let tri = io_residual(&triangle, &cyclic, 88, false);
    outcome(
        accepted && checked.len() >= 5 && worst <= 1e-6 && tri <= 1e-8,
        format!(
            "acyclic examples [{}]: max relative residual {worst:.2e} (tol 1e-6); quadratic triangle (cyclic fit): residual {tri:.2e} (tol 1e-8)",
            checked.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let series = fixtures::series(&["y", "3*y"]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut gap: f64 = 0.0;
    for _ in 0..5 {
        let z_b = random_vec(&mut rng, 2, 2.0);
        let report = min_heat_check(&series, &z_b, 2.0).unwrap();
        // series node sits at the conductance-weighted mean
        let oracle = (z_b[0] + 3.0 * z_b[1]) / 4.0;
        gap = gap.max(report.max_difference).max((report.power_minimizer[0] - oracle).abs());
    }
    let refused = matches!(
        min_heat_check(&fixtures::diode_pair_opposite(), &[1.0, 0.0], 2.0),
        Err(MinHeatError::NotHomogeneous { .. })
    );
    outcome(
        gap <= 1e-8 && refused,
        format!("quadratic series: power minimizer vs constraint solve {gap:.2e} (tol 1e-8); diode network refused: {refused}"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-5;
    let (mut fd_err, mut row_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let net = random_network(&mut rng, 8, false);
        let n_b = net.partition().boundary().len();
        let z_b = random_vec(&mut rng, n_b, 1.0);
        let s = sensitivity(&net, &z_b).unwrap();
        for r in 0..s.nrows() {
            row_err = row_err.max((s.row(r).sum() - 1.0).abs());
        }
        let scale = s.amax().max(1e-3);
        for i in 0..n_b {
            let mut p = z_b.clone();
            let mut m = z_b.clone();
            p[i] += h;
            m[i] -= h;
            let zp = solve_interior(&net, &p, None).unwrap().z_c;
            let zm = solve_interior(&net, &m, None).unwrap().z_c;
            for r in 0..s.nrows() {
                fd_err = fd_err.max((s[(r, i)] - (zp[r] - zm[r]) / (2.0 * h)).abs() / scale);
            }
        }
    }
    outcome(
        fd_err <= 1e-5 && row_err <= 1e-9,
        format!("50 (network, z_B): rel. error vs finite differences {fd_err:.2e} (tol 1e-5), max |row sum - 1| {row_err:.2e} (tol 1e-9)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("opposite diodes: effective curve is tanh(V/2)", criterion_1),
        ("same-orientation diodes: effective curve is e^(V/2) - 1", criterion_2),
        ("interior potential closed form", criterion_3),
        ("reduced potential closed form", criterion_4),
        ("linear networks: sampled reduction equals exact reduction", criterion_5),
        ("nodal currents and weighted Laplacian vs finite differences", criterion_6),
        ("reduced potential shift invariance and gradient", criterion_7),
        ("input-output equivalence of reductions", criterion_8),
        ("minimum-heat check", criterion_9),
        ("sensitivity matrix", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        if !result.passed {
            failures += 1;
        }
        println!("{} {:>2} {name}: {}", if result.passed { "PASS" } else { "FAIL" }, i + 1, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

