//! Soundness of latent projection: m-separation on the projected ADMG must
//! agree with d-separation on the full DAG for every observable query.

use causalman::projection::{d_separated, latent_project, m_separated};
use causalman::rng::NoiseStream;
use causalman::{Distribution, Domain, Mechanism, NodeId, NodeSpec, ScmGraph, Visibility};
use std::collections::HashSet;

/// Random DAG with identity-order edges and a random latent subset.
pub fn random_dag(seed: u64, max_nodes: usize) -> ScmGraph {
    let mut rng = NoiseStream::tagged(seed, 0x444147);
    let n = 2 + (rng.next_u64() as usize) % (max_nodes - 1);
    let edge_prob = 0.2 + 0.3 * rng.next_f64();
    let latent_prob = 0.2 + 0.3 * rng.next_f64();

    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let parents: Vec<NodeId> = (0..i)
            .filter(|_| rng.next_f64() < edge_prob)
            .map(|p| NodeId(p as u32))
            .collect();
        let mechanism = if parents.is_empty() {
            Mechanism::ExogenousNoise {
                distribution: Distribution::Gaussian { mu: 0.0, sigma: 1.0 },
            }
        } else {
            Mechanism::Sum { parents }
        };
        nodes.push(NodeSpec {
            id: NodeId(i as u32),
            name: format!("n{i}"),
            domain: Domain::continuous(""),
            visibility: if rng.next_f64() < latent_prob {
                Visibility::Latent
            } else {
                Visibility::Observable
            },
            mechanism,
        });
    }
    ScmGraph::new(&format!("random_{seed}"), "1", nodes)
}

fn names(graph: &ScmGraph) -> Vec<String> {
    graph.observable_nodes().map(|n| n.name.clone()).collect()
}

/// Check every (x, y, Z) with singleton x, y and Z ranging over all subsets
/// of the remaining observables. Pairwise queries determine set-valued
/// separation, so this covers the full relation.
pub fn check_graph(graph: &ScmGraph) -> usize {
    let admg = latent_project(graph);
    let obs = names(graph);
    let mut checked = 0;
    for xi in 0..obs.len() {
        for yi in xi + 1..obs.len() {
            let rest: Vec<&String> = obs
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != xi && k != yi)
                .map(|(_, name)| name)
                .collect();
            for mask in 0..(1usize << rest.len()) {
                let z: HashSet<String> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask & (1 << k) != 0)
                    .map(|(_, name)| (*name).clone())
                    .collect();
                let x: HashSet<String> = [obs[xi].clone()].into();
                let y: HashSet<String> = [obs[yi].clone()].into();
                let full = d_separated(graph, &x, &y, &z).unwrap();
                let projected = m_separated(&admg, &x, &y, &z).unwrap();
                assert_eq!(
                    full, projected,
                    "graph {} x={} y={} z={z:?}",
                    graph.name, obs[xi], obs[yi]
                );
                checked += 1;
            }
        }
    }
    checked
}

#[test]
fn projection_preserves_separation_on_random_dags() {
    let mut total = 0;
    for seed in 0..200 {
        total += check_graph(&random_dag(seed, 8));
    }
    assert!(total > 10_000, "only {total} queries checked");
}

#[test]
fn set_valued_queries_agree_too() {
    for seed in 200..230 {
        let graph = random_dag(seed, 8);
        let admg = latent_project(&graph);
        let obs = names(&graph);
        if obs.len() < 4 {
            continue;
        }
        let mut rng = NoiseStream::tagged(seed, 0x534554);
        for _ in 0..50 {
            let mut x = HashSet::new();
            let mut y = HashSet::new();
            let mut z = HashSet::new();
            for name in &obs {
                match rng.next_u64() % 4 {
                    0 => {
                        x.insert(name.clone());
                    }
                    1 => {
                        y.insert(name.clone());
                    }
                    2 => {
                        z.insert(name.clone());
                    }
                    _ => {}
                }
            }
            if x.is_empty() || y.is_empty() {
                continue;
            }
            let full = d_separated(&graph, &x, &y, &z).unwrap();
            let projected = m_separated(&admg, &x, &y, &z).unwrap();
            assert_eq!(full, projected, "seed {seed} x={x:?} y={y:?} z={z:?}");
        }
    }
}
