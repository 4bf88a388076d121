//! Library side of the `kronred` command: file formats, reports, and the
//! five verbs (`check`, `solve`, `reduce`, `curve`, `power`).
//!
//! Every command writes its primary output to `out` and progress or
//! summaries to `err`, and returns the process exit code.

// `!(a > b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod format;
pub mod report;

use thiserror::Error;

pub use format::Domain;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ASSUMPTION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("check failed: {0}")]
    Check(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("assumption failure: {0}")]
    Assumption(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Assumption(_) => EXIT_ASSUMPTION,
        }
    }
}

/// Quantity names for the two physical readings of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labels {
    pub potential: &'static str,
    pub current: &'static str,
    pub law: &'static str,
    pub potential_function: &'static str,
    pub power: &'static str,
}

impl Labels {
    pub fn for_domain(domain: Domain) -> Labels {
        match domain {
            Domain::Resistor => Labels {
                potential: "potential",
                current: "current",
                law: "conductance",
                potential_function: "co-content",
                power: "power",
            },
            Domain::Memristor => Labels {
                potential: "flux",
                current: "charge",
                law: "memductance",
                potential_function: "action",
                power: "flux-charge pairing",
            },
        }
    }
}
