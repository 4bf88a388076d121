//! Kron reduction of nonlinear static networks.
//!
//! A network is a connected directed graph whose edges carry strictly
//! monotone conductance laws `I = g(V)`. Splitting the nodes into boundary
//! and central sets, the central nodes are eliminated by solving
//! `∂K/∂z_C = 0` for the potential `K(z) = Σ_j G_j((Dᵀz)_j)`. The reduced
//! network lives on the boundary nodes; its graph is read off the Schur
//! complement of the weighted Laplacian `∂²K/∂z²`, and its per-edge laws are
//! recovered as monotone sample tables.
//!
//! ```
//! use kronred::{fixtures, reduction};
//!
//! // two diodes in series with opposite orientation behave like tanh(V/2)
//! let net = fixtures::diode_pair_opposite();
//! let curve = reduction::effective_curve(&net, 1, 2, &[2.0]).unwrap();
//! assert!((curve[0].current - 1f64.tanh()).abs() < 1e-9);
//! ```

// `!(a > b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exprlaw;
pub mod fixtures;
pub mod graph;
pub mod laplacian;
pub mod potential;
pub mod reduction;
pub mod solver;

pub use exprlaw::{EdgeLaw, Expr, Interval, LawKind};
pub use graph::{DirectedGraph, IncidenceMatrix, NodePartition};
pub use potential::Network;
pub use reduction::{reduce, ReducedNetwork, SamplingPlan};

pub use solver::SolveResult;
