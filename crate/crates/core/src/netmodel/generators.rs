use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{insert_symmetric, CouplingGraph, NetworkRecipe};
use crate::error::{invalid, Error, Result};
use crate::seeds;

const MAX_ATTEMPTS: usize = 64;

/// Open chain with periodically repeating couplings:
/// `g_{i,i+1} = pattern[(i - 1) mod len]` (1-based `i`).
pub fn build_linear_chain(n: usize, pattern: &[f64], omega0: f64) -> Result<CouplingGraph> {
    if n < 2 {
        return invalid(format!("linear chain needs at least 2 nodes, got {n}"));
    }
    if pattern.is_empty() {
        return invalid("coupling pattern is empty");
    }
    let mut couplings = BTreeMap::new();
    for i in 0..n - 1 {
        insert_symmetric(&mut couplings, i, i + 1, pattern[i % pattern.len()])?;
    }
    let mut g = CouplingGraph::new(vec![omega0; n], couplings)?;
    g.set_recipe(Some(NetworkRecipe::LinearPeriodic {
        nodes: n,
        pattern: pattern.to_vec(),
        omega0,
    }));
    Ok(g)
}

fn check_common(coupling: f64, omega0: f64) -> Result<()> {
    if !(coupling > 0.0 && coupling.is_finite()) {
        return invalid(format!("coupling must be positive, got {coupling}"));
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return invalid(format!("node frequency must be positive, got {omega0}"));
    }
    Ok(())
}

/// Watts-Strogatz small world: ring lattice where every node links to its
/// `k / 2` nearest neighbours on each side, then each lattice edge
/// `(i, i + j)` is rewired to `(i, w)` with probability `p`, `w` uniform
/// over nodes that are neither `i` nor already adjacent to it.
///
/// Disconnected draws are discarded and regenerated from the next derived
/// seed, so the result is a pure function of the arguments.
pub fn build_watts_strogatz(
    n: usize,
    k: usize,
    p: f64,
    coupling: f64,
    omega0: f64,
    seed: u64,
) -> Result<CouplingGraph> {
    if k == 0 || !k.is_multiple_of(2) || k >= n {
        return invalid(format!("neighbour count K={k} must be even, positive and < n={n}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("rewiring probability {p} outside [0, 1]"));
    }
    check_common(coupling, omega0)?;

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seeds::rng(seeds::derive(seed, attempt as u64));
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for j in 1..=k / 2 {
            for i in 0..n {
                let v = (i + j) % n;
                adj[i].insert(v);
                adj[v].insert(i);
            }
        }
        if p > 0.0 {
            for j in 1..=k / 2 {
                for i in 0..n {
                    let v = (i + j) % n;
                    if !adj[i].contains(&v) || !rng.random_bool(p) {
                        continue;
                    }
                    if adj[i].len() >= n - 1 {
                        continue;
                    }
                    let w = loop {
                        let w = rng.random_range(0..n);
                        if w != i && !adj[i].contains(&w) {
                            break w;
                        }
                    };
                    adj[i].remove(&v);
                    adj[v].remove(&i);
                    adj[i].insert(w);
                    adj[w].insert(i);
                }
            }
        }
        let mut couplings = BTreeMap::new();
        for (i, nbrs) in adj.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                couplings.insert((i, j), coupling);
            }
        }
        let mut g = CouplingGraph::new(vec![omega0; n], couplings)?;
        if g.is_connected() {
            g.set_recipe(Some(NetworkRecipe::WattsStrogatz {
                nodes: n,
                neighbors: k,
                rewire: p,
                coupling,
                omega0,
                seed,
            }));
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_ATTEMPTS,
    })
}

/// Barabási-Albert preferential attachment. Starts from `m0` unlinked core
/// nodes; each later node links to `kappa` distinct existing nodes chosen
/// with probability proportional to degree (nodes of degree zero weigh 1,
/// so the first attachment is uniform over the core). Produces exactly
/// `kappa * (n - m0)` edges.
pub fn build_barabasi_albert(
    n: usize,
    kappa: usize,
    m0: usize,
    coupling: f64,
    omega0: f64,
    seed: u64,
) -> Result<CouplingGraph> {
    if !(1 <= kappa && kappa <= m0 && m0 < n) {
        return invalid(format!(
            "Barabasi-Albert requires 1 <= kappa <= m0 < n (kappa={kappa}, m0={m0}, n={n})"
        ));
    }
    check_common(coupling, omega0)?;

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seeds::rng(seeds::derive(seed, attempt as u64));
        let mut degree = vec![0usize; n];
        let mut couplings = BTreeMap::new();
        let mut weights = Vec::with_capacity(n);
        for new in m0..n {
            weights.clear();
            weights.extend(degree[..new].iter().map(|&d| d.max(1) as f64));
            for _ in 0..kappa {
                let total: f64 = weights.iter().sum();
                let mut x = rng.random::<f64>() * total;
                let mut pick = new - 1;
                for (idx, &w) in weights.iter().enumerate() {
                    if x < w {
                        pick = idx;
                        break;
                    }
                    x -= w;
                }
                // guard against round-off landing on an already chosen node
                while weights[pick] == 0.0 {
                    pick -= 1;
                }
                weights[pick] = 0.0;
                couplings.insert((pick, new), coupling);
                degree[pick] += 1;
                degree[new] += 1;
            }
        }
        let mut g = CouplingGraph::new(vec![omega0; n], couplings)?;
        if g.is_connected() {
            g.set_recipe(Some(NetworkRecipe::BarabasiAlbert {
                nodes: n,
                attach: kappa,
                core: Some(m0),
                coupling,
                omega0,
                seed,
            }));
            return Ok(g);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network1_edges_alternate() {
        let g = build_linear_chain(16, &[0.1, 0.05], 0.25).unwrap();
        assert_eq!(g.n_edges(), 15);
        for i in 0..15 {
            let want = if i % 2 == 0 { 0.1 } else { 0.05 };
            assert_eq!(g.coupling(i, i + 1), want);
        }
        assert!(g.omega().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn network3_period_three() {
        let g = build_linear_chain(16, &[0.1, 0.05, 0.025], 0.25).unwrap();
        let seq: Vec<f64> = (0..15).map(|i| g.coupling(i, i + 1)).collect();
        assert_eq!(&seq[..6], &[0.1, 0.05, 0.025, 0.1, 0.05, 0.025]);
    }

    #[test]
    fn smallest_chain() {
        let g = build_linear_chain(2, &[0.07], 0.3).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.coupling(0, 1), 0.07);
    }

    #[test]
    fn chain_errors() {
        assert!(build_linear_chain(1, &[0.1], 0.25).is_err());
        assert!(build_linear_chain(5, &[], 0.25).is_err());
        assert!(build_linear_chain(5, &[0.1, -0.1], 0.25).is_err());
    }

    #[test]
    fn ws_without_rewiring_is_ring_lattice() {
        let g = build_watts_strogatz(50, 4, 0.0, 0.08, 0.25, 99).unwrap();
        assert_eq!(g.n_edges(), 100);
        assert!(g.degrees().iter().all(|&d| d == 4));
        for i in 0..50 {
            assert_eq!(g.coupling(i, (i + 1) % 50), 0.08);
            assert_eq!(g.coupling(i, (i + 2) % 50), 0.08);
        }
        // seed is irrelevant without rewiring
        let h = build_watts_strogatz(50, 4, 0.0, 0.08, 0.25, 1).unwrap();
        assert!(g.edges().eq(h.edges()));
    }

    #[test]
    fn ws_network4_instance() {
        let g = build_watts_strogatz(50, 4, 0.1, 0.08, 0.25, 6).unwrap();
        assert_eq!(g.n_edges(), 100);
        assert!(g.is_connected());
        let again = build_watts_strogatz(50, 4, 0.1, 0.08, 0.25, 6).unwrap();
        assert_eq!(g, again);
        let other = build_watts_strogatz(50, 4, 0.1, 0.08, 0.25, 7).unwrap();
        assert_ne!(g, other);
    }

    #[test]
    fn ws_parameter_errors() {
        assert!(build_watts_strogatz(10, 3, 0.1, 0.1, 0.25, 0).is_err());
        assert!(build_watts_strogatz(10, 10, 0.1, 0.1, 0.25, 0).is_err());
        assert!(build_watts_strogatz(10, 4, 1.5, 0.1, 0.25, 0).is_err());
    }

    #[test]
    fn ba_network5_edge_count() {
        let g = build_barabasi_albert(50, 2, 2, 0.02, 0.25, 21).unwrap();
        assert_eq!(g.n_edges(), 96);
        assert!(g.is_connected());
        assert_eq!(g, build_barabasi_albert(50, 2, 2, 0.02, 0.25, 21).unwrap());
    }

    #[test]
    fn ba_three_nodes_is_path_or_star() {
        for seed in 0..20 {
            let g = build_barabasi_albert(3, 1, 1, 0.1, 0.25, seed).unwrap();
            assert_eq!(g.n_edges(), 2);
            let mut deg = g.degrees();
            deg.sort_unstable();
            assert_eq!(deg, vec![1, 1, 2]);
        }
    }

    #[test]
    fn ba_parameter_errors() {
        assert!(build_barabasi_albert(10, 0, 1, 0.1, 0.25, 0).is_err());
        assert!(build_barabasi_albert(10, 3, 2, 0.1, 0.25, 0).is_err());
        assert!(build_barabasi_albert(5, 2, 5, 0.1, 0.25, 0).is_err());
    }
}
