//! The five reference networks with their probe couplings, interaction
//! horizons and frequency sweeps.

use serde::{Deserialize, Serialize};

use super::{CouplingGraph, NetworkRecipe, ProbeAttachment};
use crate::error::{invalid, Result};

/// Fixed instance of the small-world network.
pub const WS_SEED: u64 = 6;
/// Fixed instance of the scale-free network.
pub const BA_SEED: u64 = 21;

/// Node the probe attaches to: a 1-based index or the highest-degree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeSite {
    Node(usize),
    Named(SiteName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteName {
    Hub,
}

impl ProbeSite {
    pub const HUB: ProbeSite = ProbeSite::Named(SiteName::Hub);

    /// 0-based node index on `graph`.
    pub fn resolve(&self, graph: &CouplingGraph) -> Result<usize> {
        match *self {
            ProbeSite::Node(i) if i >= 1 && i <= graph.n_nodes() => Ok(i - 1),
            ProbeSite::Node(i) => invalid(format!("probe site {i} outside 1..={}", graph.n_nodes())),
            ProbeSite::Named(SiteName::Hub) => Ok(graph.hub()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: usize,
    pub recipe: NetworkRecipe,
    pub site: ProbeSite,
    pub k: f64,
    pub t_max: f64,
    /// `(lo, hi, points)` of the spectral sweep.
    pub sweep: (f64, f64, usize),
}

impl Preset {
    /// Network with the probe attached at frequency `omega_s`.
    pub fn graph(&self, omega_s: f64) -> Result<CouplingGraph> {
        let mut g = self.recipe.build()?;
        let site = self.site.resolve(&g)?;
        g.attach_probe(ProbeAttachment {
            site,
            coupling: self.k,
            omega: omega_s,
        })?;
        Ok(g)
    }
}

/// Reference network `id` in `1..=5`.
pub fn preset(id: usize) -> Result<Preset> {
    let chain = |pattern: &[f64]| NetworkRecipe::LinearPeriodic {
        nodes: 16,
        pattern: pattern.to_vec(),
        omega0: 0.25,
    };
    let p = match id {
        1 => Preset {
            id,
            recipe: chain(&[0.1, 0.05]),
            site: ProbeSite::Node(1),
            k: 0.01,
            t_max: 150.0,
            sweep: (0.2, 0.7, 120),
        },
        2 => Preset {
            id,
            recipe: chain(&[0.1, 0.1, 0.05]),
            site: ProbeSite::Node(1),
            k: 0.01,
            t_max: 150.0,
            sweep: (0.2, 0.7, 120),
        },
        3 => Preset {
            id,
            recipe: chain(&[0.1, 0.05, 0.025]),
            site: ProbeSite::Node(1),
            k: 0.01,
            t_max: 150.0,
            sweep: (0.2, 0.7, 120),
        },
        4 => Preset {
            id,
            recipe: NetworkRecipe::WattsStrogatz {
                nodes: 50,
                neighbors: 4,
                rewire: 0.1,
                coupling: 0.08,
                omega0: 0.25,
                seed: WS_SEED,
            },
            site: ProbeSite::Node(1),
            k: 0.02,
            t_max: 90.0,
            sweep: (0.1, 1.1, 100),
        },
        5 => Preset {
            id,
            recipe: NetworkRecipe::BarabasiAlbert {
                nodes: 50,
                attach: 2,
                core: Some(2),
                coupling: 0.02,
                omega0: 0.25,
                seed: BA_SEED,
            },
            site: ProbeSite::HUB,
            k: 0.004,
            t_max: 250.0,
            sweep: (0.5, 0.8, 100),
        },
        _ => return invalid(format!("reference networks are numbered 1..=5, got {id}")),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build() {
        for id in 1..=5 {
            let p = preset(id).unwrap();
            let g = p.graph(0.5).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.probe().unwrap().coupling, p.k);
        }
        assert!(preset(6).is_err());
    }

    #[test]
    fn hub_site_resolves_to_max_degree() {
        let g = preset(5).unwrap().graph(0.6).unwrap();
        let deg = g.degrees();
        assert_eq!(deg[g.probe().unwrap().site], *deg.iter().max().unwrap());
    }

    #[test]
    fn site_parsing() {
        #[derive(Deserialize)]
        struct W {
            site: ProbeSite,
        }
        let a: W = toml::from_str("site = 3").unwrap();
        assert_eq!(a.site, ProbeSite::Node(3));
        let b: W = toml::from_str("site = \"hub\"").unwrap();
        assert_eq!(b.site, ProbeSite::HUB);
    }
}
