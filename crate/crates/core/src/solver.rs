//! Elimination of the central nodes: solves `∂K/∂z_C(z_C, z_B) = 0` by
//! damped Newton on the strongly convex interior problem.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::laplacian::{schur_complement, submatrix};
use crate::potential::{self, Network, PotentialError};

pub const SOLVE_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 100;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("boundary vector has length {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(
        "no convergence after {iterations} Newton steps (residual {residual:e}); \
         interior problem may not be globally solvable inside the validity intervals"
    )]
    NotConverged { iterations: usize, residual: f64, z_c: Vec<f64> },
    #[error("Newton step leaves the validity interval of edge {edge} ({from} -> {to}) at y = {y}")]
    LeftInterval { edge: usize, from: String, to: String, y: f64, z_c: Vec<f64> },
    #[error("interior Hessian is not positive definite at iteration {iteration}")]
    Singular { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: SOLVE_TOL, max_iterations: MAX_NEWTON_ITERATIONS }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Central potentials, ordered as `partition().central()`.
    pub z_c: Vec<f64>,
    /// Boundary nodal currents `∂K/∂z_B` at the solution, ordered as
    /// `partition().boundary()`.
    pub j_b: Vec<f64>,
    pub iterations: usize,
    /// ∞-norm of the interior gradient.
    pub final_residual: f64,
    pub converged: bool,
}

impl SolveResult {
    pub fn full_potentials(&self, net: &Network, z_b: &[f64]) -> Vec<f64> {
        net.assemble(&self.z_c, z_b)
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn solve_interior(net: &Network, z_b: &[f64], init: Option<&[f64]>) -> Result<SolveResult, SolveError> {
    solve_interior_with(net, z_b, init, SolverOptions::default())
}

pub fn solve_interior_with(
    net: &Network,
    z_b: &[f64],
    init: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<SolveResult, SolveError> {
    let part = net.partition();
    let (boundary, central) = (part.boundary(), part.central());
    if z_b.len() != boundary.len() {
        return Err(SolveError::Dimension { got: z_b.len(), expected: boundary.len() });
    }
    let mut z_c = match init {
        Some(x) if x.len() == central.len() => x.to_vec(),
        Some(x) => return Err(SolveError::Dimension { got: x.len(), expected: central.len() }),
        None => {
            let mean = z_b.iter().sum::<f64>() / z_b.len() as f64;
            vec![mean; central.len()]
        }
    };

    let mut iterations = 0;
    let mut current = potential::evaluate(net, &net.assemble(&z_c, z_b))?;
    loop {
        let residual = max_abs(central.iter().map(|&i| current.grad[i]));
        if residual <= opts.tol {
            let j_b = boundary.iter().map(|&i| current.grad[i]).collect();
            return Ok(SolveResult { z_c, j_b, iterations, final_residual: residual, converged: true });
        }
        if iterations >= opts.max_iterations {
            return Err(SolveError::NotConverged { iterations, residual, z_c });
        }
        iterations += 1;

        let h_cc = submatrix(&current.hess, central, central);
        let g_c = DVector::from_iterator(central.len(), central.iter().map(|&i| current.grad[i]));
        let chol = h_cc.cholesky().ok_or(SolveError::Singular { iteration: iterations })?;
        let direction = -chol.solve(&g_c);
        let slope = g_c.dot(&direction);

        let mut t = 1.0;
        let mut blocked: Option<PotentialError> = None;
        let accepted = loop {
            if t < MIN_STEP {
                break None;
            }
            let trial: Vec<f64> = z_c.iter().zip(direction.iter()).map(|(a, d)| a + t * d).collect();
            match potential::evaluate(net, &net.assemble(&trial, z_b)) {
                Err(e) => blocked = Some(e),
                Ok(eval) => {
                    let armijo = eval.k <= current.k + ARMIJO * t * slope;
                    // decrease in K below quadrature noise: judge by the gradient
                    let noisy = -ARMIJO * t * slope < 1e-12 * (1.0 + current.k.abs())
                        && max_abs(central.iter().map(|&i| eval.grad[i])) < residual;
                    if armijo || noisy {
                        break Some((trial, eval));
                    }
                }
            }
            t *= 0.5;
        };
        match accepted {
            Some((trial, eval)) => {
                z_c = trial;
                current = eval;
            }
            None => {
                return Err(match blocked {
                    Some(PotentialError::Edge { edge, from, to, source }) => {
                        let y = match source {
                            crate::exprlaw::LawError::OutOfInterval { y, .. } => y,
                            _ => f64::NAN,
                        };
                        SolveError::LeftInterval { edge, from, to, y, z_c }
                    }
                    _ => SolveError::NotConverged { iterations, residual, z_c },
                })
            }
        }
    }
}

/// Smallest eigenvalue of the interior block `∂²K/∂z_C²` at `z`.
pub fn interior_hessian_check(net: &Network, z: &[f64]) -> Result<f64, PotentialError> {
    let central = net.partition().central();
    if central.is_empty() {
        return Ok(f64::INFINITY);
    }
    let l = potential::weighted_laplacian(net, z)?;
    let block = submatrix(&l, central, central);
    Ok(block.symmetric_eigenvalues().min())
}

/// `∂z_C/∂z_B = −[∂²K/∂z_C²]⁻¹·∂²K/∂z_C∂z_B` at the interior solution.
pub fn sensitivity(net: &Network, z_b: &[f64]) -> Result<DMatrix<f64>, SolveError> {
    let solved = solve_interior(net, z_b, None)?;
    let part = net.partition();
    let z = solved.full_potentials(net, z_b);
    let l = potential::weighted_laplacian(net, &z)?;
    let (b, c) = (part.boundary(), part.central());
    if c.is_empty() {
        return Ok(DMatrix::zeros(0, b.len()));
    }
    let chol = submatrix(&l, c, c).cholesky().ok_or(SolveError::Singular { iteration: solved.iterations })?;
    Ok(-chol.solve(&submatrix(&l, c, b)))
}

/// `K̂(z_B) = K(z_C(z_B), z_B)`.
pub fn reduced_potential(net: &Network, z_b: &[f64]) -> Result<f64, SolveError> {
    let solved = solve_interior(net, z_b, None)?;
    Ok(potential::k_value(net, &solved.full_potentials(net, z_b))?)
}

/// Interior solution together with the reduced Hessian (Schur complement of
/// the weighted Laplacian) at that point.
pub fn solve_with_reduced_hessian(net: &Network, z_b: &[f64]) -> Result<(SolveResult, DMatrix<f64>), SolveError> {
    let solved = solve_interior(net, z_b, None)?;
    let l = potential::weighted_laplacian(net, &solved.full_potentials(net, z_b))?;
    let part = net.partition();
    let s = schur_complement(&l, part.boundary(), part.central())
        .ok_or(SolveError::Singular { iteration: solved.iterations })?;
    Ok((solved, s))
}
