//! Network and reduced-network files (TOML).
//!
//! ```toml
//! domain = "resistor"          # or "memristor"; labels only
//! nodes = ["0", "1", "2"]
//! boundary = ["1", "2"]
//!
//! [[edges]]
//! from = "1"
//! to = "0"
//! law = "exp(y) - 1"
//! kind = "conductance"         # or "cocontent"; default conductance
//! interval = [-8.0, 8.0]       # optional
//! ```

use std::fs;
use std::path::Path;

use kronred::exprlaw::LawError;
use kronred::graph::NodePartition;
use kronred::reduction::{AssumptionCertificate, LawTable, ReducedEdge, SamplingPlan, TableColumns};
use kronred::{DirectedGraph, EdgeLaw, Expr, Interval, LawKind, Network, ReducedNetwork};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The only interpolation written by `reduce`.
pub const INTERPOLATION: &str = "monotone-cubic-hermite";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    Resistor,
    Memristor,
}

fn conductance_kind() -> LawKind {
    LawKind::Conductance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    pub law: String,
    #[serde(default = "conductance_kind")]
    pub kind: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default)]
    pub domain: Domain,
    pub nodes: Vec<String>,
    pub boundary: Vec<String>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedEdgeEntry {
    pub from: String,
    pub to: String,
    pub interpolation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_weight: Option<f64>,
    pub table: TableColumns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedFile {
    #[serde(default)]
    pub domain: Domain,
    pub nodes: Vec<String>,
    pub plan: SamplingPlan,
    pub certificate: AssumptionCertificate,
    pub edges: Vec<ReducedEdgeEntry>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse { path: path.display().to_string(), message: e.to_string() })
}

/// A syntactically valid network: names resolved, laws parsed, intervals
/// well formed. Convexity and connectivity are not checked yet.
#[derive(Debug, Clone)]
pub struct RawNetwork {
    pub domain: Domain,
    pub graph: DirectedGraph,
    pub boundary: Vec<usize>,
    pub laws: Vec<(Expr, LawKind, Interval)>,
    pub law_texts: Vec<String>,
}

impl RawNetwork {
    pub fn load(path: &Path) -> Result<RawNetwork, CliError> {
        let file: NetworkFile = parse_toml(path, &read(path)?)?;
        RawNetwork::from_file(&file).map_err(|message| CliError::Parse { path: path.display().to_string(), message })
    }

    pub fn from_file(file: &NetworkFile) -> Result<RawNetwork, String> {
        let pairs: Vec<(&str, &str)> = file.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
        let graph = DirectedGraph::from_names(&file.nodes.iter().map(String::as_str).collect::<Vec<_>>(), &pairs)
            .map_err(|e| format!("graph: {e}"))?;
        if file.boundary.is_empty() {
            return Err("boundary: must list at least one node".into());
        }
        let boundary = file
            .boundary
            .iter()
            .map(|name| graph.node_index(name).ok_or_else(|| format!("boundary: unknown node `{name}`")))
            .collect::<Result<Vec<_>, _>>()?;
        NodePartition::new(graph.node_count(), boundary.clone()).map_err(|e| format!("boundary: {e}"))?;
        let mut laws = Vec::with_capacity(file.edges.len());
        for (j, e) in file.edges.iter().enumerate() {
            let expr = Expr::parse(&e.law).map_err(|err| {
                format!("edges[{j}] ({} -> {}): law `{}`: {err}", e.from, e.to, e.law)
            })?;
            let interval = match e.interval {
                Some([lo, hi]) => Interval::new(lo, hi).map_err(|err| format!("edges[{j}].interval: {err}"))?,
                None => Interval::default(),
            };
            laws.push((expr, e.kind, interval));
        }
        let law_texts = file.edges.iter().map(|e| e.law.clone()).collect();
        Ok(RawNetwork { domain: file.domain, graph, boundary, laws, law_texts })
    }

    pub fn edge_label(&self, j: usize) -> String {
        let (from, to) = self.graph.edges()[j];
        format!("edge {j} ({} -> {})", self.graph.nodes()[from], self.graph.nodes()[to])
    }

    /// Certifies every law (convexity on its interval).
    pub fn certify_laws(&self) -> Vec<Result<EdgeLaw, LawError>> {
        self.laws.iter().map(|(expr, kind, interval)| EdgeLaw::new(expr.clone(), *kind, *interval)).collect()
    }

    /// Full validation; law and connectivity failures are check failures.
    pub fn build(&self) -> Result<Network, CliError> {
        let mut laws = Vec::with_capacity(self.laws.len());
        for (j, law) in self.certify_laws().into_iter().enumerate() {
            laws.push(law.map_err(|e| CliError::Check(format!("{}: {e}", self.edge_label(j))))?);
        }
        let partition = NodePartition::new(self.graph.node_count(), self.boundary.clone())
            .map_err(|e| CliError::Check(e.to_string()))?;
        Network::new(self.graph.clone(), laws, partition).map_err(|e| CliError::Check(e.to_string()))
    }

    pub fn boundary_names(&self) -> Vec<String> {
        self.boundary.iter().map(|&i| self.graph.nodes()[i].clone()).collect()
    }
}

/// Loads and fully validates a network file.
pub fn load_network(path: &Path) -> Result<(Network, Domain), CliError> {
    let raw = RawNetwork::load(path)?;
    Ok((raw.build()?, raw.domain))
}

impl ReducedFile {
    pub fn from_reduced(reduced: &ReducedNetwork, domain: Domain, plan: SamplingPlan) -> ReducedFile {
        let names = reduced.graph.nodes();
        let edges = reduced
            .graph
            .edges()
            .iter()
            .zip(&reduced.edges)
            .map(|(&(from, to), e)| ReducedEdgeEntry {
                from: names[from].clone(),
                to: names[to].clone(),
                interpolation: INTERPOLATION.into(),
                exact_weight: e.exact_weight,
                table: e.table.columns(),
            })
            .collect();
        ReducedFile { domain, nodes: names.to_vec(), plan, certificate: reduced.certificate.clone(), edges }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reduced network serializes")
    }

    pub fn load(path: &Path) -> Result<ReducedFile, CliError> {
        parse_toml(path, &read(path)?)
    }

    /// Rebuilds the evaluable reduced network.
    pub fn to_reduced(&self) -> Result<ReducedNetwork, String> {
        let pairs: Vec<(&str, &str)> = self.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
        let graph = DirectedGraph::from_names(&self.nodes.iter().map(String::as_str).collect::<Vec<_>>(), &pairs)
            .map_err(|e| format!("graph: {e}"))?;
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(j, e)| {
                if e.interpolation != INTERPOLATION {
                    return Err(format!("edges[{j}]: unsupported interpolation `{}`", e.interpolation));
                }
                let table = LawTable::from_columns(e.table.clone()).map_err(|err| format!("edges[{j}].table: {err}"))?;
                Ok(ReducedEdge { table, exact_weight: e.exact_weight })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(ReducedNetwork { graph, edges, certificate: self.certificate.clone() })
    }
}
