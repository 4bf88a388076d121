//! Recovered edge laws as monotone piecewise-cubic Hermite tables.
//!
//! Knot slopes are either supplied (exact differential conductances from
//! the reduced Hessian, or a fitted spline) or estimated with the
//! Fritsch–Butland harmonic mean. Either way they are then limited with the
//! Fritsch–Carlson condition `α² + β² ≤ 9`, which makes the interpolant
//! monotone on every segment. The co-content is the exact integral of the
//! cubic, anchored at `Ĝ(0) = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table needs at least two points, got {0}")]
    TooShort(usize),
    #[error("column lengths differ")]
    Length,
    #[error("voltages not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("currents not strictly increasing at y = {y}")]
    NotMonotone { y: f64 },
    #[error("non-positive or non-finite slope {slope} at y = {y}")]
    BadSlope { y: f64, slope: f64 },
    #[error("table range [{lo}, {hi}] does not contain the anchor 0")]
    NoAnchor { lo: f64, hi: f64 },
    #[error("y = {y} outside table range [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
}

/// Serialized form: four parallel columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableColumns {
    pub y: Vec<f64>,
    pub current: Vec<f64>,
    pub slope: Vec<f64>,
    pub cocontent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawTable {
    y: Vec<f64>,
    current: Vec<f64>,
    slope: Vec<f64>,
    cocontent: Vec<f64>,
}

fn hermite(h: f64, t: f64, f0: f64, f1: f64, m0: f64, m1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * h * m1;
    let deriv = ((6.0 * t2 - 6.0 * t) * f0 + (-6.0 * t2 + 6.0 * t) * f1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (3.0 * t2 - 2.0 * t) * m1;
    (value, deriv)
}

/// Fritsch–Butland slope estimates for strictly increasing data.
fn estimate_slopes(y: &[f64], f: &[f64]) -> Vec<f64> {
    let n = y.len();
    let h: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (f[k + 1] - f[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (w1, w2) = (2.0 * h[k] + h[k - 1], h[k] + 2.0 * h[k - 1]);
        m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s <= 0.0 {
            0.5 * d0
        } else if s > 3.0 * d0 {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

impl LawTable {
    /// Builds a table from strictly increasing `(y, current)` knots. The
    /// range must contain `0`.
    pub fn new(y: Vec<f64>, current: Vec<f64>, slope: Option<Vec<f64>>) -> Result<LawTable, TableError> {
        let n = y.len();
        if n < 2 {
            return Err(TableError::TooShort(n));
        }
        if current.len() != n || slope.as_ref().is_some_and(|s| s.len() != n) {
            return Err(TableError::Length);
        }
        for k in 1..n {
            if !(y[k] > y[k - 1]) {
                return Err(TableError::NotIncreasing(k));
            }
            if !(current[k] > current[k - 1]) {
                return Err(TableError::NotMonotone { y: y[k] });
            }
        }
        if !(y[0] <= 0.0 && 0.0 <= y[n - 1]) {
            return Err(TableError::NoAnchor { lo: y[0], hi: y[n - 1] });
        }
        let mut m = match slope {
            Some(s) => {
                for (&yk, &sk) in y.iter().zip(&s) {
                    if !(sk > 0.0 && sk.is_finite()) {
                        return Err(TableError::BadSlope { y: yk, slope: sk });
                    }
                }
                s
            }
            None => estimate_slopes(&y, &current),
        };
        for k in 0..n - 1 {
            let delta = (current[k + 1] - current[k]) / (y[k + 1] - y[k]);
            let (a, b) = (m[k] / delta, m[k + 1] / delta);
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                m[k] = tau * a * delta;
                m[k + 1] = tau * b * delta;
            }
        }
        let mut table = LawTable { y, current, slope: m, cocontent: Vec::new() };
        table.cocontent = table.y.iter().map(|&v| table.integral_from_zero(v)).collect();
        Ok(table)
    }

    pub fn from_columns(columns: TableColumns) -> Result<LawTable, TableError> {
        LawTable::new(columns.y, columns.current, Some(columns.slope))
    }

    pub fn columns(&self) -> TableColumns {
        TableColumns {
            y: self.y.clone(),
            current: self.current.clone(),
            slope: self.slope.clone(),
            cocontent: self.cocontent.clone(),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.y[0], self.y[self.y.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.y
    }

    pub fn currents(&self) -> &[f64] {
        &self.current
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }

    pub fn cocontents(&self) -> &[f64] {
        &self.cocontent
    }

    fn segment(&self, v: f64) -> usize {
        match self.y.partition_point(|&k| k <= v) {
            0 => 0,
            p => (p - 1).min(self.y.len() - 2),
        }
    }

    fn eval_unchecked(&self, v: f64) -> (f64, f64) {
        let k = self.segment(v);
        let h = self.y[k + 1] - self.y[k];
        hermite(h, (v - self.y[k]) / h, self.current[k], self.current[k + 1], self.slope[k], self.slope[k + 1])
    }

    /// Exact integral of the cubic between two points of one segment.
    fn segment_integral(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        (b - a) / 6.0 * (self.eval_unchecked(a).0 + 4.0 * self.eval_unchecked(mid).0 + self.eval_unchecked(b).0)
    }

    fn integral_from_zero(&self, v: f64) -> f64 {
        let (lo_pt, hi_pt, sign) = if v >= 0.0 { (0.0, v, 1.0) } else { (v, 0.0, -1.0) };
        let mut total = 0.0;
        let mut a = lo_pt;
        while a < hi_pt {
            let k = self.segment(a);
            let b = if k + 1 == self.y.len() - 1 { hi_pt } else { self.y[k + 1].min(hi_pt) };
            total += self.segment_integral(a, b);
            a = b;
        }
        sign * total
    }

    fn check(&self, v: f64) -> Result<(), TableError> {
        let (lo, hi) = self.range();
        if lo <= v && v <= hi {
            Ok(())
        } else {
            Err(TableError::OutOfRange { y: v, lo, hi })
        }
    }

    pub fn current(&self, v: f64) -> Result<f64, TableError> {
        self.check(v)?;
        Ok(self.eval_unchecked(v).0)
    }

    pub fn slope(&self, v: f64) -> Result<f64, TableError> {
        self.check(v)?;
        Ok(self.eval_unchecked(v).1)
    }

    /// `Ĝ(v) = ∫₀^v Î`.
    pub fn cocontent(&self, v: f64) -> Result<f64, TableError> {
        self.check(v)?;
        let k = self.segment(v);
        let knot = self.y[k];
        Ok(self.cocontent[k] + self.segment_integral(knot, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn linear_data_is_reproduced_exactly() {
        let t = LawTable::new(vec![-2.0, 0.0, 3.0], vec![-1.0, 0.0, 1.5], None).unwrap();
        for v in [-2.0, -1.3, 0.0, 0.4, 2.9, 3.0] {
            assert!((t.current(v).unwrap() - 0.5 * v).abs() < 1e-15);
            assert!((t.slope(v).unwrap() - 0.5).abs() < 1e-15);
            assert!((t.cocontent(v).unwrap() - 0.25 * v * v).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_slopes_give_fourth_order_accuracy() {
        let y = grid(-4.0, 4.0, 129);
        let f: Vec<f64> = y.iter().map(|&v| (0.5 * v).tanh()).collect();
        let s: Vec<f64> = y.iter().map(|&v| 0.5 / (0.5 * v).cosh().powi(2)).collect();
        let t = LawTable::new(y, f, Some(s)).unwrap();
        for v in grid(-3.99, 3.99, 997) {
            assert!((t.current(v).unwrap() - (0.5 * v).tanh()).abs() < 3e-8);
            let g = 2.0 * (0.5 * v).cosh().ln();
            assert!((t.cocontent(v).unwrap() - g).abs() < 3e-8);
        }
    }

    #[test]
    fn limited_slopes_keep_monotonicity() {
        // steep step with wildly wrong supplied slopes
        let y = vec![-1.0, 0.0, 0.1, 1.0];
        let f = vec![0.0, 0.01, 1.0, 1.01];
        let t = LawTable::new(y.clone(), f.clone(), Some(vec![50.0, 50.0, 50.0, 50.0])).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for v in grid(-1.0, 1.0, 2001) {
            let c = t.current(v).unwrap();
            assert!(c >= prev - 1e-15);
            prev = c;
        }
        let estimated = LawTable::new(y, f, None).unwrap();
        assert!(estimated.slopes().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(LawTable::new(vec![0.0], vec![0.0], None), Err(TableError::TooShort(1))));
        assert!(matches!(LawTable::new(vec![0.0, 0.0], vec![0.0, 1.0], None), Err(TableError::NotIncreasing(1))));
        assert!(matches!(LawTable::new(vec![0.0, 1.0], vec![1.0, 1.0], None), Err(TableError::NotMonotone { .. })));
        assert!(matches!(LawTable::new(vec![1.0, 2.0], vec![0.0, 1.0], None), Err(TableError::NoAnchor { .. })));
        let t = LawTable::new(vec![-1.0, 1.0], vec![-1.0, 1.0], None).unwrap();
        assert!(matches!(t.current(1.5), Err(TableError::OutOfRange { .. })));
    }

    #[test]
    fn columns_round_trip() {
        let t = LawTable::new(vec![-1.0, -0.2, 0.5, 2.0], vec![-3.0, -0.1, 0.7, 9.0], None).unwrap();
        let back = LawTable::from_columns(t.columns()).unwrap();
        assert_eq!(back, t);
    }
}
