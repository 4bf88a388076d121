use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kronred::potential::{self, power_balance_check, MinHeatError};
use kronred::reduction::{self, infer_reduced_graph, ReductionError, SamplingPlan};
use kronred::laplacian::LaplacianStructure;
use kronred::solver::{solve_interior, SolveResult};
use kronred::Network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::format::{load_network, RawNetwork, ReducedFile};
use crate::report::{DiagnosticReport, Status};
use crate::{CliError, Labels, EXIT_ASSUMPTION, EXIT_CHECK, EXIT_OK, EXIT_SOLVER};

const CHECK_SEED: u64 = 0x6368_6563;
const STRUCTURE_TOL: f64 = 1e-9;
const MIN_HEAT_TOL: f64 = 1e-8;

fn io_error(path: &str) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_string(), source }
}

fn emit(w: &mut dyn Write, text: &str) -> Result<(), CliError> {
    w.write_all(text.as_bytes()).map_err(io_error("<output>"))
}

/// Largest amplitude keeping every edge voltage of a random state inside
/// all validity intervals.
fn safe_amplitude(net: &Network) -> f64 {
    let reach = net.laws().iter().map(|l| l.interval().lo.abs().min(l.interval().hi)).fold(f64::INFINITY, f64::min);
    (reach / 4.0).min(1.0)
}

pub fn check(path: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let raw = RawNetwork::load(path)?;
    let labels = Labels::for_domain(raw.domain);
    let mut report = DiagnosticReport::default();

    let components = raw.graph.component_count();
    report.push("connectivity", components == 1, format!("{components} component(s)"));
    for (j, law) in raw.certify_laws().iter().enumerate() {
        let name = format!("strong convexity, {} `{}`", raw.edge_label(j), raw.law_texts[j]);
        match law {
            Ok(l) => {
                let iv = l.interval();
                report.push(name, true, format!("min slope of {} = {:.6e} on [{}, {}]", labels.law, l.convexity_margin(), iv.lo, iv.hi))
            }
            Err(e) => report.push(name, false, e.to_string()),
        }
    }

    if report.passed() {
        let net = raw.build()?;
        let n = net.node_count();
        let amplitude = safe_amplitude(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-amplitude..amplitude)).collect();

        for (state, point) in [("zero", vec![0.0; n]), ("random", z.clone())] {
            match potential::weighted_laplacian(&net, &point) {
                Ok(l) => {
                    let st = LaplacianStructure::measure(&l);
                    report.push(
                        format!("Laplacian structure at {state} state"),
                        st.is_laplacian(STRUCTURE_TOL) && st.is_connected(STRUCTURE_TOL),
                        format!(
                            "max |row sum| {:.1e}, max off-diagonal {:.3e}, min eigenvalue {:.3e}, second eigenvalue {:.3e}",
                            st.max_abs_row_sum, st.max_off_diagonal, st.min_eigenvalue, st.second_eigenvalue
                        ),
                    );
                }
                Err(e) => report.push(format!("Laplacian structure at {state} state"), false, e.to_string()),
            }
        }

        let shift = 0.5 * amplitude;
        let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
        match (potential::k_value(&net, &z), potential::k_value(&net, &shifted), potential::nodal_currents(&net, &z)) {
            (Ok(k), Ok(ks), Ok(j)) => {
                let gap = (k - ks).abs();
                report.push("shift invariance of K", gap <= 1e-9 * (1.0 + k.abs()), format!("|K(z + c) - K(z)| = {gap:.1e}"));
                let sum: f64 = j.iter().sum();
                let scale = 1.0 + j.iter().map(|v| v.abs()).fold(0.0, f64::max);
                report.push(
                    format!("nodal {} balance", labels.current),
                    sum.abs() <= 1e-12 * scale,
                    format!("|sum J| = {:.1e}", sum.abs()),
                );
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => report.push("shift invariance of K", false, e.to_string()),
        }

        match power_balance_check(&net, &z) {
            Ok(b) => report.push(
                format!("{} balance", labels.power),
                b.within(1e-9),
                format!("edges {:.6e}, nodes {:.6e}, difference {:.1e}", b.edge_power, b.nodal_power, b.difference),
            ),
            Err(e) => report.push(format!("{} balance", labels.power), false, e.to_string()),
        }

        let plan = SamplingPlan::default();
        match infer_reduced_graph(&net, &plan) {
            Ok((graph, cert)) => {
                report.push("interior solves at sampled boundary states", true, format!("{} solves", cert.samples_used));
                let status = if cert.support_stable { Status::Pass } else { Status::Warn };
                let distinct = {
                    let mut b = cert.support_bitmaps.clone();
                    b.sort();
                    b.dedup();
                    b.len()
                };
                report.push_status("reduced support stable across samples", status, format!("{distinct} distinct pattern(s)"));
                report.push_status(
                    "reduced graph",
                    Status::Info,
                    format!(
                        "{} boundary nodes, {} edges, {}",
                        graph.node_count(),
                        graph.edge_count(),
                        if cert.acyclic { "acyclic" } else { "cyclic" }
                    ),
                );
            }
            Err(e) => report.push("interior solves at sampled boundary states", false, e.to_string()),
        }
    }

    emit(out, &report.to_string())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK })
}

/// Parses `name=value` assignments covering exactly the boundary nodes.
pub fn boundary_values(boundary: &[String], assignments: &[String]) -> Result<Vec<f64>, CliError> {
    let mut values: Vec<Option<f64>> = vec![None; boundary.len()];
    for a in assignments {
        for item in a.split(',').filter(|s| !s.trim().is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("assignment `{item}` is not of the form name=value")))?;
            let name = name.trim();
            let pos = boundary
                .iter()
                .position(|b| b == name)
                .ok_or_else(|| CliError::Usage(format!("`{name}` is not a boundary node")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("value `{value}` for `{name}` is not a number")))?;
            if values[pos].replace(v).is_some() {
                return Err(CliError::Usage(format!("`{name}` assigned twice")));
            }
        }
    }
    let missing: Vec<&str> =
        boundary.iter().zip(&values).filter(|(_, v)| v.is_none()).map(|(b, _)| b.as_str()).collect();
    if !missing.is_empty() {
        return Err(CliError::Usage(format!("missing boundary assignment for {}", missing.join(", "))));
    }
    Ok(values.into_iter().flatten().collect())
}

fn solve_loaded(path: &Path, assignments: &[String]) -> Result<(Network, Labels, Vec<f64>, SolveResult), CliError> {
    let raw = RawNetwork::load(path)?;
    let z_b = boundary_values(&raw.boundary_names(), assignments)?;
    let net = raw.build()?;
    let solved = solve_interior(&net, &z_b, None).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok((net, Labels::for_domain(raw.domain), z_b, solved))
}

/// Shortest round-trip form, in exponent notation for very small or large values.
fn number(v: f64) -> String {
    if v == 0.0 || (1e-4..1e6).contains(&v.abs()) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn power_lines(net: &Network, labels: &Labels, z: &[f64]) -> Result<String, CliError> {
    let b = power_balance_check(net, z).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(format!(
        "{}: edges {}, nodes {}, difference {:.3e} ({})\n",
        labels.power,
        number(b.edge_power),
        number(b.nodal_power),
        b.difference,
        if b.within(1e-9) { "balanced" } else { "NOT balanced" }
    ))
}

pub fn solve(path: &Path, assignments: &[String], out: &mut dyn Write) -> Result<i32, CliError> {
    let (net, labels, z_b, solved) = solve_loaded(path, assignments)?;
    let names = net.graph().nodes();
    let mut text = format!(
        "converged in {} Newton step(s), residual {:.3e}\n",
        solved.iterations, solved.final_residual
    );
    text += &format!("central {}s:\n", labels.potential);
    for (&i, v) in net.partition().central().iter().zip(&solved.z_c) {
        text += &format!("  {} = {}\n", names[i], number(*v));
    }
    text += &format!("boundary {}s:\n", labels.current);
    for (&i, v) in net.partition().boundary().iter().zip(&solved.j_b) {
        text += &format!("  {} = {}\n", names[i], number(*v));
    }
    let z = solved.full_potentials(&net, &z_b);
    let k = potential::k_value(&net, &z).map_err(|e| CliError::Solver(e.to_string()))?;
    text += &format!("reduced {} = {}\n", labels.potential_function, number(k));
    text += &power_lines(&net, &labels, &z)?;
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone)]
pub struct ReduceOptions {
    pub plan: SamplingPlan,
    pub out: Option<PathBuf>,
}

pub fn reduce(path: &Path, options: &ReduceOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let raw = RawNetwork::load(path)?;
    let net = raw.build()?;
    let reduced = reduction::reduce(&net, &options.plan).map_err(|e| match e {
        ReductionError::Solve { .. } => CliError::Solver(e.to_string()),
        other => CliError::Assumption(other.to_string()),
    })?;
    let text = ReducedFile::from_reduced(&reduced, raw.domain, options.plan).to_toml();
    match &options.out {
        Some(p) => fs::write(p, &text).map_err(io_error(&p.display().to_string()))?,
        None => emit(out, &text)?,
    }
    let c = &reduced.certificate;
    let summary = format!(
        "reduced to {} boundary nodes and {} edges ({:?}, {}); held-out residual {:.3e} (relative {:.3e}); support {}; integrability asymmetry {:.3e}; {}\n",
        reduced.graph.node_count(),
        reduced.graph.edge_count(),
        c.method,
        if c.acyclic { "acyclic" } else { "cyclic" },
        c.consistency_residual,
        c.relative_residual,
        if c.support_stable { "stable" } else { "UNSTABLE" },
        c.integrability_max_asymmetry,
        if c.accepted { "accepted" } else { "NOT accepted" },
    );
    emit(err, &summary)?;
    Ok(if c.accepted && c.support_stable { EXIT_OK } else { EXIT_ASSUMPTION })
}

#[derive(Debug, Clone)]
pub struct CurveOptions {
    pub pair: String,
    pub vmin: f64,
    pub vmax: f64,
    pub points: usize,
    pub out: Option<PathBuf>,
}

/// 17 significant digits.
fn csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve(path: &Path, options: &CurveOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let (a_name, b_name) = options
        .pair
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("--pair `{}` must be two node names `a,b`", options.pair)))?;
    if options.points < 2 || !(options.vmin < options.vmax) {
        return Err(CliError::Usage("need --points >= 2 and --vmin < --vmax".into()));
    }
    let (net, _) = load_network(path)?;
    let index = |name: &str| {
        net.graph().node_index(name.trim()).ok_or_else(|| CliError::Usage(format!("unknown node `{}`", name.trim())))
    };
    let (a, b) = (index(a_name)?, index(b_name)?);
    let step = (options.vmax - options.vmin) / (options.points - 1) as f64;
    let grid: Vec<f64> = (0..options.points)
        .map(|i| if i + 1 == options.points { options.vmax } else { options.vmin + step * i as f64 })
        .collect();
    let curve = reduction::effective_curve(&net, a, b, &grid).map_err(|e| match e {
        ReductionError::BadPair { .. } => CliError::Usage(e.to_string()),
        other => CliError::Solver(other.to_string()),
    })?;

    let mut csv = String::from("V,I,Ghat\n");
    let mut failed = Vec::new();
    for p in &curve {
        csv += &format!("{},{},{}\n", csv_number(p.v), csv_number(p.current), csv_number(p.cocontent));
        if let Some(e) = &p.error {
            failed.push(format!("V = {}: {e}", p.v));
        }
    }
    match &options.out {
        Some(p) => fs::write(p, &csv).map_err(io_error(&p.display().to_string()))?,
        None => emit(out, &csv)?,
    }
    if failed.is_empty() {
        return Ok(EXIT_OK);
    }
    emit(err, &format!("{} of {} points failed:\n  {}\n", failed.len(), curve.len(), failed.join("\n  ")))?;
    Ok(EXIT_SOLVER)
}

pub fn power(path: &Path, assignments: &[String], degree: f64, out: &mut dyn Write) -> Result<i32, CliError> {
    let (net, labels, z_b, solved) = solve_loaded(path, assignments)?;
    let z = solved.full_potentials(&net, &z_b);
    let mut text = power_lines(&net, &labels, &z)?;
    let code = match potential::min_heat_check(&net, &z_b, degree) {
        Ok(r) => {
            let agree = r.max_difference <= MIN_HEAT_TOL;
            text += &format!(
                "minimum-{} principle: direct minimizer vs interior solve differ by {:.3e} after {} descent steps ({})\n",
                labels.power,
                r.max_difference,
                r.descent_iterations,
                if agree { "agree" } else { "DISAGREE" }
            );
            if agree {
                EXIT_OK
            } else {
                EXIT_CHECK
            }
        }
        Err(MinHeatError::NotHomogeneous { .. }) => {
            text += &format!(
                "minimum-{} principle: refused, {} is not homogeneous of degree {degree}\n",
                labels.power, labels.potential_function
            );
            EXIT_ASSUMPTION
        }
        Err(e) => return Err(CliError::Solver(e.to_string())),
    };
    emit(out, &text)?;
    Ok(code)
}
