//! Dense Laplacian helpers: block extraction, Schur complements, and the
//! structural checks every (reduced) Laplacian must pass.

use nalgebra::DMatrix;

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// `M_BB − M_BC·M_CC⁻¹·M_CB`. Returns `None` if `M_CC` is not positive definite.
/// With `central` empty this is `M_BB`.
pub fn schur_complement(m: &DMatrix<f64>, boundary: &[usize], central: &[usize]) -> Option<DMatrix<f64>> {
    let m_bb = submatrix(m, boundary, boundary);
    if central.is_empty() {
        return Some(m_bb);
    }
    let m_cc = submatrix(m, central, central);
    let m_cb = submatrix(m, central, boundary);
    let chol = m_cc.cholesky()?;
    let x = chol.solve(&m_cb);
    let mut s = m_bb - m_cb.transpose() * x;
    symmetrize(&mut s);
    Some(s)
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for k in i + 1..n {
            let v = 0.5 * (m[(i, k)] + m[(k, i)]);
            m[(i, k)] = v;
            m[(k, i)] = v;
        }
    }
}

/// Measured structure of a candidate Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianStructure {
    pub symmetry_gap: f64,
    pub max_abs_row_sum: f64,
    /// Largest off-diagonal entry (must be ≤ 0 up to rounding).
    pub max_off_diagonal: f64,
    pub min_eigenvalue: f64,
    /// Second-smallest eigenvalue; positive iff the kernel is exactly span 𝟙.
    pub second_eigenvalue: f64,
}

impl LaplacianStructure {
    pub fn measure(l: &DMatrix<f64>) -> LaplacianStructure {
        let n = l.nrows();
        let mut symmetry_gap: f64 = 0.0;
        let mut max_off_diagonal = f64::NEG_INFINITY;
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    symmetry_gap = symmetry_gap.max((l[(i, k)] - l[(k, i)]).abs());
                    max_off_diagonal = max_off_diagonal.max(l[(i, k)]);
                }
            }
        }
        let max_abs_row_sum = l.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
        let mut sym = l.clone();
        symmetrize(&mut sym);
        let mut eig: Vec<f64> = if n == 0 { Vec::new() } else { sym.symmetric_eigenvalues().iter().copied().collect() };
        eig.sort_by(|a, b| a.total_cmp(b));
        LaplacianStructure {
            symmetry_gap,
            max_abs_row_sum,
            max_off_diagonal: if n > 1 { max_off_diagonal } else { 0.0 },
            min_eigenvalue: eig.first().copied().unwrap_or(0.0),
            second_eigenvalue: eig.get(1).copied().unwrap_or(f64::INFINITY),
        }
    }

    /// Zero row/column sums, non-positive off-diagonals and PSD, each within
    /// `tol`. Does not require connectivity.
    pub fn is_laplacian(&self, tol: f64) -> bool {
        self.symmetry_gap <= tol && self.max_abs_row_sum <= tol && self.max_off_diagonal <= tol && self.min_eigenvalue >= -tol
    }

    /// Kernel is exactly span 𝟙.
    pub fn is_connected(&self, tol: f64) -> bool {
        self.second_eigenvalue > tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_of_diode_laplacian_at_zero() {
        let l = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
        let s = schur_complement(&l, &[1, 2], &[0]).unwrap();
        assert!((&s - DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])).abs().max() < 1e-15);
        assert_eq!(schur_complement(&l, &[0, 1, 2], &[]).unwrap(), l);
        let st = LaplacianStructure::measure(&s);
        assert!(st.is_laplacian(1e-12) && st.is_connected(1e-12));
    }

    #[test]
    fn detects_non_laplacians() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(!LaplacianStructure::measure(&m).is_laplacian(1e-9));
        let disconnected = DMatrix::zeros(2, 2);
        let st = LaplacianStructure::measure(&disconnected);
        assert!(st.is_laplacian(1e-12) && !st.is_connected(1e-12));
    }
}
