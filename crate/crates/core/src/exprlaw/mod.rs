//! Edge laws: a strictly monotone conductance `g(y)`, its symbolic slope
//! `g'(y)`, and the co-content `G(y) = ∫₀^y g`.

mod expr;
pub mod quad;

pub use expr::{Expr, Func, ParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance of the co-content quadrature.
pub const COCONTENT_TOL: f64 = 1e-10;

/// Grid size used when certifying strong convexity.
pub const DEFAULT_CONVEXITY_SAMPLES: usize = 4097;

pub const DEFAULT_INTERVAL: Interval = Interval { lo: -8.0, hi: 8.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("validity interval [{lo}, {hi}] must satisfy lo < 0 < hi")]
    BadInterval { lo: f64, hi: f64 },
    #[error("law is not finite at y = {y}")]
    NotFinite { y: f64 },
    #[error(transparent)]
    NotStronglyConvex(#[from] ConvexityViolation),
    #[error("y = {y} outside validity interval [{lo}, {hi}]")]
    OutOfInterval { y: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("slope g'({y}) = {slope} is not positive")]
pub struct ConvexityViolation {
    pub y: f64,
    pub slope: f64,
}

/// Closed interval `[lo, hi]` with `lo < 0 < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, LawError> {
        if lo < 0.0 && 0.0 < hi && lo.is_finite() && hi.is_finite() {
            Ok(Interval { lo, hi })
        } else {
            Err(LawError::BadInterval { lo, hi })
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    /// `samples` equally spaced points including both ends.
    pub fn grid(&self, samples: usize) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (samples.max(2) - 1) as f64;
        (0..samples.max(2)).map(move |i| if i + 1 == samples.max(2) { self.hi } else { self.lo + step * i as f64 })
    }
}

impl Default for Interval {
    fn default() -> Self {
        DEFAULT_INTERVAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// Text gives the current `g(y)`.
    Conductance,
    /// Text gives the co-content `G(y)`; `g` is its derivative.
    Cocontent,
}

/// Sampled strong-convexity test: evaluates `g'` on a uniform grid and
/// returns the minimum if it is positive, else the first violating point.
pub fn check_strong_convexity(
    g_prime: &Expr,
    interval: Interval,
    samples: usize,
) -> Result<f64, ConvexityViolation> {
    assert!(samples >= 2, "convexity check needs at least two samples");
    let mut margin = f64::INFINITY;
    for y in interval.grid(samples) {
        let slope = g_prime.eval(y);
        if !(slope > 0.0) {
            return Err(ConvexityViolation { y, slope });
        }
        margin = margin.min(slope);
    }
    Ok(margin)
}

/// A certified edge law. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLaw {
    source: Expr,
    kind: LawKind,
    g: Expr,
    g_prime: Expr,
    interval: Interval,
    margin: f64,
}

impl EdgeLaw {
    pub fn new(expr: Expr, kind: LawKind, interval: Interval) -> Result<EdgeLaw, LawError> {
        Self::with_samples(expr, kind, interval, DEFAULT_CONVEXITY_SAMPLES)
    }

    pub fn parse(text: &str, kind: LawKind, interval: Interval) -> Result<EdgeLaw, LawError> {
        Self::new(Expr::parse(text)?, kind, interval)
    }

    /// Conductance law on the default interval.
    pub fn conductance(text: &str) -> Result<EdgeLaw, LawError> {
        Self::parse(text, LawKind::Conductance, Interval::default())
    }

    pub fn with_samples(
        expr: Expr,
        kind: LawKind,
        interval: Interval,
        samples: usize,
    ) -> Result<EdgeLaw, LawError> {
        let g = match kind {
            LawKind::Conductance => expr.clone(),
            LawKind::Cocontent => expr.differentiate(),
        };
        let g_prime = g.differentiate();
        for y in interval.grid(samples) {
            if !g.eval(y).is_finite() {
                return Err(LawError::NotFinite { y });
            }
        }
        let margin = check_strong_convexity(&g_prime, interval, samples)?;
        Ok(EdgeLaw { source: expr, kind, g, g_prime, interval, margin })
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn g_prime(&self) -> &Expr {
        &self.g_prime
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Sampled lower bound on `g'` found at construction.
    pub fn convexity_margin(&self) -> f64 {
        self.margin
    }

    pub fn check_strong_convexity(&self, samples: usize) -> Result<f64, ConvexityViolation> {
        check_strong_convexity(&self.g_prime, self.interval, samples)
    }

    fn guard(&self, y: f64) -> Result<(), LawError> {
        if self.interval.contains(y) {
            Ok(())
        } else {
            Err(LawError::OutOfInterval { y, lo: self.interval.lo, hi: self.interval.hi })
        }
    }

    pub fn current(&self, y: f64) -> Result<f64, LawError> {
        self.guard(y)?;
        Ok(self.g.eval(y))
    }

    pub fn slope(&self, y: f64) -> Result<f64, LawError> {
        self.guard(y)?;
        Ok(self.g_prime.eval(y))
    }

    /// `G(y) = ∫₀^y g(v) dv`, so `G(0) = 0`.
    pub fn cocontent(&self, y: f64) -> Result<f64, LawError> {
        self.guard(y)?;
        Ok(quad::integrate(|v| self.g.eval(v), 0.0, y, COCONTENT_TOL))
    }

    /// `Some(ḡ)` when the law is exactly `g(y) = ḡ·y` with `ḡ > 0`.
    pub fn linear_conductance(&self) -> Option<f64> {
        if !self.g_prime.is_constant() || self.g.eval(0.0) != 0.0 {
            return None;
        }
        let slope = self.g_prime.eval(0.0);
        (slope > 0.0).then_some(slope)
    }
}
