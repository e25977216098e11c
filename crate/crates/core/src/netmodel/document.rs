//! TOML graph documents.
//!
//! ```toml
//! nodes = 3
//! omega0 = 0.25            # or: omega = [0.25, 0.3, 0.25]
//! edges = [[1, 2, 0.1], [2, 3, 0.05]]
//!
//! [probe]                  # optional
//! site = 1
//! k = 0.01
//! omega_s = 0.58
//!
//! [recipe]                 # optional provenance
//! kind = "linear-periodic"
//! nodes = 3
//! pattern = [0.1, 0.05]
//! omega0 = 0.25
//! ```
//!
//! Indices are 1-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{insert_symmetric, CouplingGraph, NetworkRecipe, ProbeAttachment};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub site: usize,
    pub k: f64,
    pub omega_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<NetworkRecipe>,
}

impl GraphDocument {
    pub fn from_graph(graph: &CouplingGraph) -> Self {
        let omega = graph.omega();
        let uniform = omega.iter().all(|&w| w == omega[0]);
        GraphDocument {
            nodes: graph.n_nodes(),
            omega0: uniform.then_some(omega[0]),
            omega: (!uniform).then(|| omega.to_vec()),
            edges: graph.edges().map(|(i, j, g)| (i + 1, j + 1, g)).collect(),
            probe: graph.probe().map(|p| ProbeBlock {
                site: p.site + 1,
                k: p.coupling,
                omega_s: p.omega,
            }),
            recipe: graph.recipe().cloned(),
        }
    }

    pub fn into_graph(self) -> Result<CouplingGraph> {
        let omega = match (self.omega0, self.omega) {
            (Some(w), None) => vec![w; self.nodes],
            (None, Some(list)) => {
                if list.len() != self.nodes {
                    return invalid(format!(
                        "omega list has {} entries for {} nodes",
                        list.len(),
                        self.nodes
                    ));
                }
                list
            }
            (Some(_), Some(_)) => return invalid("give either omega0 or omega, not both"),
            (None, None) => return invalid("missing node frequencies (omega0 or omega)"),
        };
        let mut couplings = BTreeMap::new();
        for &(i, j, g) in &self.edges {
            if i == 0 || j == 0 || i > self.nodes || j > self.nodes {
                return invalid(format!("edge [{i}, {j}] outside 1..={}", self.nodes));
            }
            insert_symmetric(&mut couplings, i - 1, j - 1, g)?;
        }
        let mut graph = CouplingGraph::new(omega, couplings)?;
        if let Some(p) = self.probe {
            if p.site == 0 {
                return invalid("probe site is 1-based");
            }
            graph.attach_probe(ProbeAttachment {
                site: p.site - 1,
                coupling: p.k,
                omega: p.omega_s,
            })?;
        }
        graph.set_recipe(self.recipe);
        Ok(graph)
    }
}

pub fn load_graph(text: &str) -> Result<CouplingGraph> {
    let doc: GraphDocument = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    doc.into_graph()
}

pub fn save_graph(graph: &CouplingGraph) -> String {
    toml::to_string(&GraphDocument::from_graph(graph)).expect("graph document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::build_linear_chain;

    fn network1() -> CouplingGraph {
        let mut g = build_linear_chain(16, &[0.1, 0.05], 0.25).unwrap();
        g.attach_probe(ProbeAttachment {
            site: 0,
            coupling: 0.01,
            omega: 0.58,
        })
        .unwrap();
        g
    }

    #[test]
    fn round_trip_network1() {
        let g = network1();
        let text = save_graph(&g);
        assert_eq!(load_graph(&text).unwrap(), g);
    }

    #[test]
    fn asymmetric_document_rejected() {
        let text = "nodes = 2\nomega0 = 0.25\nedges = [[1, 2, 0.1], [2, 1, 0.2]]\n";
        assert!(matches!(load_graph(text), Err(Error::Invalid(_))));
    }

    #[test]
    fn negative_weight_rejected() {
        let text = "nodes = 2\nomega0 = 0.25\nedges = [[1, 2, -0.1]]\n";
        assert!(load_graph(text).is_err());
    }

    #[test]
    fn malformed_document_rejected() {
        assert!(matches!(load_graph("nodes = [oops"), Err(Error::Document(_))));
        assert!(matches!(
            load_graph("nodes = 2\nomega0 = 0.25\nedges = []\ncolour = 1\n"),
            Err(Error::Document(_))
        ));
    }

    #[test]
    fn missing_probe_leaves_graph_unattached() {
        let text = "nodes = 3\nomega = [0.25, 0.3, 0.35]\nedges = [[1, 2, 0.1], [3, 2, 0.1]]\n";
        let mut g = load_graph(text).unwrap();
        assert!(g.probe().is_none());
        assert!(crate::dynamics::QuadraticModel::assemble(&g).is_err());
        g.attach_probe(ProbeAttachment {
            site: 2,
            coupling: 0.01,
            omega: 0.5,
        })
        .unwrap();
        assert!(crate::dynamics::QuadraticModel::assemble(&g).is_ok());
        assert_eq!(load_graph(&save_graph(&g)).unwrap(), g);
    }
}
