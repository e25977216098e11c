//! Environment networks: node frequencies, symmetric spring couplings and
//! the attachment point of the probe oscillator.
//!
//! Node indices are 0-based throughout the Rust API. Graph documents and
//! reports use 1-based indices so that node `i` matches `q_i`.

mod document;
mod generators;
pub mod presets;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use document::{load_graph, save_graph, GraphDocument};
pub use generators::{build_barabasi_albert, build_linear_chain, build_watts_strogatz};
pub use presets::{preset, Preset, ProbeSite};

/// Where and how strongly the probe couples to the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeAttachment {
    /// 0-based node index `l`.
    pub site: usize,
    /// Bilinear coupling `k` (`H_I = k q_S q_l`).
    pub coupling: f64,
    /// Bare probe frequency `omega_S`.
    pub omega: f64,
}

/// Parameters that regenerate a network. Carried as provenance in graph
/// documents and used directly by run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkRecipe {
    LinearPeriodic {
        nodes: usize,
        pattern: Vec<f64>,
        omega0: f64,
    },
    WattsStrogatz {
        nodes: usize,
        /// Ring-lattice neighbour count `K` (even).
        #[serde(default = "default_ws_neighbors")]
        neighbors: usize,
        rewire: f64,
        coupling: f64,
        omega0: f64,
        seed: u64,
    },
    BarabasiAlbert {
        nodes: usize,
        /// Edges added per new node.
        attach: usize,
        /// Size of the seed core; defaults to `attach`.
        #[serde(default)]
        core: Option<usize>,
        coupling: f64,
        omega0: f64,
        seed: u64,
    },
    /// Edges given verbatim, 1-based `[i, j, g]` triples.
    Explicit {
        nodes: usize,
        omega0: f64,
        edges: Vec<(usize, usize, f64)>,
    },
}

fn default_ws_neighbors() -> usize {
    4
}

impl NetworkRecipe {
    pub fn build(&self) -> Result<CouplingGraph> {
        let mut graph = match self {
            NetworkRecipe::LinearPeriodic {
                nodes,
                pattern,
                omega0,
            } => build_linear_chain(*nodes, pattern, *omega0)?,
            NetworkRecipe::WattsStrogatz {
                nodes,
                neighbors,
                rewire,
                coupling,
                omega0,
                seed,
            } => build_watts_strogatz(*nodes, *neighbors, *rewire, *coupling, *omega0, *seed)?,
            NetworkRecipe::BarabasiAlbert {
                nodes,
                attach,
                core,
                coupling,
                omega0,
                seed,
            } => build_barabasi_albert(
                *nodes,
                *attach,
                core.unwrap_or(*attach),
                *coupling,
                *omega0,
                *seed,
            )?,
            NetworkRecipe::Explicit {
                nodes,
                omega0,
                edges,
            } => {
                let mut couplings = BTreeMap::new();
                for &(i, j, g) in edges {
                    if i == 0 || j == 0 {
                        return invalid("explicit edges use 1-based node indices");
                    }
                    insert_symmetric(&mut couplings, i - 1, j - 1, g)?;
                }
                CouplingGraph::new(vec![*omega0; *nodes], couplings)?
            }
        };
        graph.recipe = Some(self.clone());
        Ok(graph)
    }
}

/// Environment topology with node frequencies and positive symmetric
/// couplings, optionally carrying the probe attachment.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    omega: Vec<f64>,
    // keyed by (i, j) with i < j
    couplings: BTreeMap<(usize, usize), f64>,
    probe: Option<ProbeAttachment>,
    recipe: Option<NetworkRecipe>,
}

pub(crate) fn insert_symmetric(
    map: &mut BTreeMap<(usize, usize), f64>,
    i: usize,
    j: usize,
    g: f64,
) -> Result<()> {
    if i == j {
        return invalid(format!("self-coupling on node {}", i + 1));
    }
    if !(g > 0.0 && g.is_finite()) {
        return invalid(format!(
            "coupling between nodes {} and {} must be positive, got {g}",
            i + 1,
            j + 1
        ));
    }
    let key = (i.min(j), i.max(j));
    match map.get(&key) {
        Some(&old) if old != g => invalid(format!(
            "asymmetric coupling between nodes {} and {}: {old} vs {g}",
            key.0 + 1,
            key.1 + 1
        )),
        _ => {
            map.insert(key, g);
            Ok(())
        }
    }
}

impl CouplingGraph {
    /// Builds a graph with no probe attached. `couplings` keys must be
    /// `(i, j)` with `i < j`.
    pub fn new(omega: Vec<f64>, couplings: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let graph = CouplingGraph {
            omega,
            couplings,
            probe: None,
            recipe: None,
        };
        graph.validate()?;
        Ok(graph)
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.omega.len();
        if n == 0 {
            return invalid("network must have at least one node");
        }
        if let Some(w) = self.omega.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return invalid(format!("node frequencies must be positive, got {w}"));
        }
        for (&(i, j), &g) in &self.couplings {
            if i >= j || j >= n {
                return invalid(format!("edge ({}, {}) is out of range", i + 1, j + 1));
            }
            if !(g > 0.0 && g.is_finite()) {
                return invalid(format!("edge ({}, {}) has weight {g}", i + 1, j + 1));
            }
        }
        if let Some(p) = &self.probe {
            if p.site >= n {
                return invalid(format!("probe site {} outside 1..={n}", p.site + 1));
            }
            if !(p.coupling >= 0.0 && p.coupling.is_finite()) {
                return invalid(format!("probe coupling must be >= 0, got {}", p.coupling));
            }
            if !(p.omega > 0.0 && p.omega.is_finite()) {
                return invalid(format!("probe frequency must be positive, got {}", p.omega));
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Coupling `g_ij`, zero when the nodes are not linked.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.couplings.get(&key).copied().unwrap_or(0.0)
    }

    /// Edges as `(i, j, g)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &g)| (i, j, g))
    }

    pub fn n_edges(&self) -> usize {
        self.couplings.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes()];
        for &(i, j) in self.couplings.keys() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for &(i, j) in self.couplings.keys() {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n_nodes()
    }

    /// Node with the largest degree (lowest index on ties).
    pub fn hub(&self) -> usize {
        let deg = self.degrees();
        let max = deg.iter().copied().max().unwrap_or(0);
        deg.iter().position(|&d| d == max).unwrap_or(0)
    }

    pub fn probe(&self) -> Option<&ProbeAttachment> {
        self.probe.as_ref()
    }

    pub fn recipe(&self) -> Option<&NetworkRecipe> {
        self.recipe.as_ref()
    }

    /// Attaches (or replaces) the probe.
    pub fn attach_probe(&mut self, probe: ProbeAttachment) -> Result<()> {
        let previous = self.probe.replace(probe);
        if let Err(e) = self.validate() {
            self.probe = previous;
            return Err(e);
        }
        Ok(())
    }

    /// Copy of the graph with the probe frequency replaced, for sweeps.
    pub fn with_probe_omega(&self, omega: f64) -> Result<Self> {
        let mut probe = *self
            .probe
            .as_ref()
            .ok_or_else(|| crate::Error::Invalid("graph has no probe attached".into()))?;
        probe.omega = omega;
        let mut g = self.clone();
        g.attach_probe(probe)?;
        Ok(g)
    }

    /// Copy of the graph with the probe coupling replaced.
    pub fn with_probe_coupling(&self, coupling: f64) -> Result<Self> {
        let mut probe = *self
            .probe
            .as_ref()
            .ok_or_else(|| crate::Error::Invalid("graph has no probe attached".into()))?;
        probe.coupling = coupling;
        let mut g = self.clone();
        g.attach_probe(probe)?;
        Ok(g)
    }

    pub(crate) fn set_recipe(&mut self, recipe: Option<NetworkRecipe>) {
        self.recipe = recipe;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_probe_site() {
        let mut g = build_linear_chain(4, &[0.1], 0.25).unwrap();
        let err = g.attach_probe(ProbeAttachment {
            site: 4,
            coupling: 0.01,
            omega: 0.3,
        });
        assert!(err.is_err());
        assert!(g.probe().is_none());
    }

    #[test]
    fn asymmetric_insert_is_rejected() {
        let mut map = BTreeMap::new();
        insert_symmetric(&mut map, 0, 1, 0.1).unwrap();
        insert_symmetric(&mut map, 1, 0, 0.1).unwrap();
        assert!(insert_symmetric(&mut map, 1, 0, 0.2).is_err());
        assert!(insert_symmetric(&mut map, 2, 2, 0.2).is_err());
        assert!(insert_symmetric(&mut map, 2, 3, -0.2).is_err());
    }

    #[test]
    fn explicit_recipe_builds() {
        let recipe = NetworkRecipe::Explicit {
            nodes: 3,
            omega0: 0.25,
            edges: vec![(1, 2, 0.1), (2, 3, 0.05)],
        };
        let g = recipe.build().unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(g.coupling(2, 1), 0.05);
        assert_eq!(g.recipe(), Some(&recipe));
    }

    #[test]
    fn hub_prefers_lowest_index() {
        let recipe = NetworkRecipe::Explicit {
            nodes: 4,
            omega0: 0.25,
            edges: vec![(1, 2, 0.1), (3, 4, 0.1), (3, 2, 0.1)],
        };
        assert_eq!(recipe.build().unwrap().hub(), 1);
    }
}
