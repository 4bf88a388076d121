use rayon::prelude::*;

use super::ReductionError;
use crate::potential::{self, Network};
use crate::solver::{solve_interior, SolveError};

/// One point of a two-terminal characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub v: f64,
    /// Current injected at the first terminal.
    pub current: f64,
    /// `K̂(v, 0) − K̂(0, 0)`.
    pub cocontent: f64,
    /// Set (with NaN values) when the solve at this voltage failed.
    pub error: Option<SolveError>,
}

fn point(net: &Network, v: f64) -> Result<(f64, f64), SolveError> {
    let z_b = [v, 0.0];
    let solved = solve_interior(net, &z_b, None)?;
    let k = potential::k_value(net, &solved.full_potentials(net, &z_b))?;
    Ok((solved.j_b[0], k))
}

/// Effective characteristic between nodes `a` and `b` with every other node
/// eliminated: `z_a = V`, `z_b = 0`. Points are solved independently, so a
/// failure at one voltage only marks that point.
pub fn effective_curve(net: &Network, a: usize, b: usize, v_grid: &[f64]) -> Result<Vec<CurvePoint>, ReductionError> {
    let n = net.node_count();
    if a == b || a >= n || b >= n {
        return Err(ReductionError::BadPair { a, b });
    }
    let pair = net.with_boundary(vec![a, b])?;
    let (_, k0) = point(&pair, 0.0).map_err(|source| ReductionError::Solve { z_b: vec![0.0, 0.0], source })?;
    Ok(v_grid
        .par_iter()
        .map(|&v| match point(&pair, v) {
            Ok((current, k)) => CurvePoint { v, current, cocontent: k - k0, error: None },
            Err(e) => CurvePoint { v, current: f64::NAN, cocontent: f64::NAN, error: Some(e) },
        })
        .collect())
}
