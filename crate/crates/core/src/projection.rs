//! Latent projection of a full DAG onto its observables, producing an ADMG,
//! plus d-/m-separation oracles used to verify the projection.

use crate::scm::{ScmGraph, Visibility};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeparationError {
    #[error("query sets must be disjoint")]
    Overlap,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Acyclic directed mixed graph over observable node names. Directed and
/// bidirected edges may coexist between a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admg {
    pub nodes: Vec<String>,
    /// Ordered pairs (from, to), indices into `nodes`, sorted.
    pub directed: Vec<(usize, usize)>,
    /// Unordered pairs (a, b) with a < b, sorted.
    pub bidirected: Vec<(usize, usize)>,
}

impl Admg {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Number of pairs that carry both a directed and a bidirected edge.
    pub fn pairs_with_both(&self) -> usize {
        let bi: HashSet<(usize, usize)> = self.bidirected.iter().copied().collect();
        let mut pairs: HashSet<(usize, usize)> = HashSet::new();
        for &(a, b) in &self.directed {
            let key = (a.min(b), a.max(b));
            if bi.contains(&key) {
                pairs.insert(key);
            }
        }
        pairs.len()
    }
}

/// Project the graph onto its observables.
///
/// For observables a, b:
/// - directed a -> b iff a directed path a => b exists whose intermediate
///   nodes are all latent;
/// - bidirected a <-> b iff some latent node reaches both a and b through
///   directed paths whose non-endpoint nodes are all latent.
pub fn latent_project(graph: &ScmGraph) -> Admg {
    let n = graph.len();
    let children = graph.children();
    let latent: Vec<bool> = graph
        .nodes
        .iter()
        .map(|node| node.visibility == Visibility::Latent)
        .collect();

    // Observable nodes keep graph order; map node id -> admg index.
    let mut admg_index: HashMap<usize, usize> = HashMap::new();
    let mut names = Vec::new();
    for node in &graph.nodes {
        if !latent[node.id.index()] {
            admg_index.insert(node.id.index(), names.len());
            names.push(node.name.clone());
        }
    }

    // reach[v] = observables reachable from v via directed paths whose
    // intermediate nodes are all latent (v itself excluded).
    let mut reach: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for source in 0..n {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                let ci = c.index();
                if seen[ci] {
                    continue;
                }
                seen[ci] = true;
                if latent[ci] {
                    queue.push_back(ci);
                } else {
                    reach[source].insert(ci);
                }
            }
        }
    }

    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    for source in 0..n {
        if latent[source] {
            continue;
        }
        for &target in &reach[source] {
            directed.insert((admg_index[&source], admg_index[&target]));
        }
    }

    let mut bidirected: HashSet<(usize, usize)> = HashSet::new();
    for l in 0..n {
        if !latent[l] {
            continue;
        }
        let obs: Vec<usize> = reach[l].iter().copied().collect();
        for i in 0..obs.len() {
            for j in i + 1..obs.len() {
                let a = admg_index[&obs[i]];
                let b = admg_index[&obs[j]];
                bidirected.insert((a.min(b), a.max(b)));
            }
        }
    }

    let mut directed: Vec<_> = directed.into_iter().collect();
    directed.sort_unstable();
    let mut bidirected: Vec<_> = bidirected.into_iter().collect();
    bidirected.sort_unstable();
    Admg { nodes: names, directed, bidirected }
}

/// Plain directed graph used by the separation oracles.
struct Dag {
    parents: Vec<Vec<usize>>,
}

impl Dag {
    fn from_scm(graph: &ScmGraph) -> Dag {
        let n = graph.len();
        let mut parents = vec![Vec::new(); n];
        for (p, c) in graph.edges() {
            parents[c.index()].push(p.index());
        }
        Dag { parents }
    }

    fn n(&self) -> usize {
        self.parents.len()
    }

    /// Ancestors of seeds, seeds included.
    fn ancestral_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if !mask[s] {
                mask[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &p in &self.parents[v] {
                if !mask[p] {
                    mask[p] = true;
                    queue.push_back(p);
                }
            }
        }
        mask
    }

    /// d-separation via ancestral moralization: restrict to An(X u Y u Z),
    /// marry co-parents, drop directions, delete Z, test connectivity.
    fn d_separated(&self, xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
        let mut seeds: Vec<usize> = Vec::new();
        seeds.extend_from_slice(xs);
        seeds.extend_from_slice(ys);
        seeds.extend_from_slice(zs);
        let mask = self.ancestral_mask(&seeds);

        let n = self.n();
        let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for v in 0..n {
            if !mask[v] {
                continue;
            }
            let pa: Vec<usize> = self.parents[v].iter().copied().filter(|&p| mask[p]).collect();
            for &p in &pa {
                adj[v].insert(p);
                adj[p].insert(v);
            }
            for i in 0..pa.len() {
                for j in i + 1..pa.len() {
                    adj[pa[i]].insert(pa[j]);
                    adj[pa[j]].insert(pa[i]);
                }
            }
        }

        let blocked: HashSet<usize> = zs.iter().copied().collect();
        let targets: HashSet<usize> = ys.iter().copied().collect();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &x in xs {
            if !blocked.contains(&x) {
                seen[x] = true;
                queue.push_back(x);
            }
        }
        while let Some(v) = queue.pop_front() {
            if targets.contains(&v) {
                return false;
            }
            for &w in &adj[v] {
                if !seen[w] && !blocked.contains(&w) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        true
    }
}

fn resolve(graph: &ScmGraph, names: &HashSet<String>) -> Result<Vec<usize>, SeparationError> {
    let mut out = Vec::with_capacity(names.len());
    let mut sorted: Vec<&String> = names.iter().collect();
    sorted.sort();
    for name in sorted {
        let node = graph
            .node_by_name(name)
            .map_err(|_| SeparationError::UnknownNode(name.clone()))?;
        out.push(node.id.index());
    }
    Ok(out)
}

fn check_disjoint(sets: &[&HashSet<String>]) -> Result<(), SeparationError> {
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !sets[i].is_disjoint(sets[j]) {
                return Err(SeparationError::Overlap);
            }
        }
    }
    Ok(())
}

/// Standard d-separation (path blocking) on the full DAG.
pub fn d_separated(
    graph: &ScmGraph,
    x: &HashSet<String>,
    y: &HashSet<String>,
    z: &HashSet<String>,
) -> Result<bool, SeparationError> {
    check_disjoint(&[x, y, z])?;
    if x.is_empty() || y.is_empty() {
        return Ok(true);
    }
    let dag = Dag::from_scm(graph);
    let xs = resolve(graph, x)?;
    let ys = resolve(graph, y)?;
    let zs = resolve(graph, z)?;
    Ok(dag.d_separated(&xs, &ys, &zs))
}

/// m-separation on an ADMG: bidirected edges carry colliding arrowheads at
/// both ends. Implemented by canonicalization — every a <-> b becomes a
/// fresh latent common parent — followed by d-separation, which is exact.
pub fn m_separated(
    admg: &Admg,
    x: &HashSet<String>,
    y: &HashSet<String>,
    z: &HashSet<String>,
) -> Result<bool, SeparationError> {
    check_disjoint(&[x, y, z])?;
    if x.is_empty() || y.is_empty() {
        return Ok(true);
    }

    let n = admg.nodes.len();
    let total = n + admg.bidirected.len();
    let mut parents = vec![Vec::new(); total];
    for &(a, b) in &admg.directed {
        parents[b].push(a);
    }
    for (k, &(a, b)) in admg.bidirected.iter().enumerate() {
        let l = n + k;
        parents[a].push(l);
        parents[b].push(l);
    }
    let dag = Dag { parents };

    let index = |names: &HashSet<String>| -> Result<Vec<usize>, SeparationError> {
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        sorted
            .into_iter()
            .map(|name| {
                admg.index_of(name)
                    .ok_or_else(|| SeparationError::UnknownNode(name.clone()))
            })
            .collect()
    };
    Ok(dag.d_separated(&index(x)?, &index(y)?, &index(z)?))
}

/// Convenience for tests and CLI: build singleton/multi sets from slices.
pub fn name_set(names: &[&str]) -> HashSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Distribution;
    use crate::scm::{Mechanism, NodeId, NodeSpec};
    use crate::value::Domain;

    fn node(id: u32, name: &str, parents: &[u32], latent: bool) -> NodeSpec {
        let mechanism = if parents.is_empty() {
            Mechanism::ExogenousNoise {
                distribution: Distribution::Gaussian { mu: 0.0, sigma: 1.0 },
            }
        } else {
            Mechanism::Sum { parents: parents.iter().map(|&p| NodeId(p)).collect() }
        };
        NodeSpec {
            id: NodeId(id),
            name: name.into(),
            domain: Domain::continuous(""),
            visibility: if latent { Visibility::Latent } else { Visibility::Observable },
            mechanism,
        }
    }

    fn graph(nodes: Vec<NodeSpec>) -> ScmGraph {
        ScmGraph::new("g", "1", nodes)
    }

    #[test]
    fn chain_through_latent_projects_to_directed_edge() {
        let g = graph(vec![
            node(0, "A", &[], false),
            node(1, "L", &[0], true),
            node(2, "B", &[1], false),
        ]);
        let admg = latent_project(&g);
        assert_eq!(admg.nodes, vec!["A", "B"]);
        assert_eq!(admg.directed, vec![(0, 1)]);
        assert!(admg.bidirected.is_empty());
    }

    #[test]
    fn latent_fork_projects_to_bidirected_edge() {
        let g = graph(vec![
            node(0, "L", &[], true),
            node(1, "A", &[0], false),
            node(2, "B", &[0], false),
        ]);
        let admg = latent_project(&g);
        assert!(admg.directed.is_empty());
        assert_eq!(admg.bidirected, vec![(0, 1)]);
    }

    #[test]
    fn latent_free_projection_is_identity() {
        let g = graph(vec![
            node(0, "A", &[], false),
            node(1, "B", &[0], false),
            node(2, "C", &[0, 1], false),
        ]);
        let admg = latent_project(&g);
        assert_eq!(admg.directed, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(admg.bidirected.is_empty());
        // Idempotence on latent-free graphs: projecting again via the same
        // edge set changes nothing.
        let again = latent_project(&g);
        assert_eq!(admg, again);
    }

    #[test]
    fn d_separation_textbook_cases() {
        // chain A -> B -> C
        let chain = graph(vec![
            node(0, "A", &[], false),
            node(1, "B", &[0], false),
            node(2, "C", &[1], false),
        ]);
        assert!(d_separated(&chain, &name_set(&["A"]), &name_set(&["C"]), &name_set(&["B"])).unwrap());
        assert!(!d_separated(&chain, &name_set(&["A"]), &name_set(&["C"]), &name_set(&[])).unwrap());

        // collider A -> C <- B
        let collider = graph(vec![
            node(0, "A", &[], false),
            node(1, "B", &[], false),
            node(2, "C", &[0, 1], false),
        ]);
        assert!(d_separated(&collider, &name_set(&["A"]), &name_set(&["B"]), &name_set(&[])).unwrap());
        assert!(!d_separated(&collider, &name_set(&["A"]), &name_set(&["B"]), &name_set(&["C"])).unwrap());

        // fork A <- L -> B
        let fork = graph(vec![
            node(0, "L", &[], false),
            node(1, "A", &[0], false),
            node(2, "B", &[0], false),
        ]);
        assert!(!d_separated(&fork, &name_set(&["A"]), &name_set(&["B"]), &name_set(&[])).unwrap());
        assert!(d_separated(&fork, &name_set(&["A"]), &name_set(&["B"]), &name_set(&["L"])).unwrap());

        assert!(d_separated(&fork, &name_set(&["A"]), &name_set(&["A"]), &name_set(&[])).is_err());
    }

    #[test]
    fn m_separation_on_bidirected_edges() {
        // A <-> B is open marginally.
        let pair = Admg {
            nodes: vec!["A".into(), "B".into()],
            directed: vec![],
            bidirected: vec![(0, 1)],
        };
        assert!(!m_separated(&pair, &name_set(&["A"]), &name_set(&["B"]), &name_set(&[])).unwrap());

        // A <-> C <-> B blocks at unconditioned collider C, opens given C.
        let triple = Admg {
            nodes: vec!["A".into(), "B".into(), "C".into()],
            directed: vec![],
            bidirected: vec![(0, 2), (1, 2)],
        };
        assert!(m_separated(&triple, &name_set(&["A"]), &name_set(&["B"]), &name_set(&[])).unwrap());
        assert!(!m_separated(&triple, &name_set(&["A"]), &name_set(&["B"]), &name_set(&["C"])).unwrap());
    }

    #[test]
    fn projected_fork_matches_full_graph_for_all_conditioning_sets() {
        let g = graph(vec![
            node(0, "L", &[], true),
            node(1, "A", &[0], false),
            node(2, "B", &[0], false),
            node(3, "C", &[1, 2], false),
        ]);
        let admg = latent_project(&g);
        let observables = ["A", "B", "C"];
        for x in 0..observables.len() {
            for y in 0..observables.len() {
                if x == y {
                    continue;
                }
                let rest: Vec<&str> = observables
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != x && i != y)
                    .map(|(_, &n)| n)
                    .collect();
                for mask in 0..(1usize << rest.len()) {
                    let z: Vec<&str> = rest
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| mask & (1 << i) != 0)
                        .map(|(_, &n)| n)
                        .collect();
                    let xs = name_set(&[observables[x]]);
                    let ys = name_set(&[observables[y]]);
                    let zs = name_set(&z);
                    assert_eq!(
                        d_separated(&g, &xs, &ys, &zs).unwrap(),
                        m_separated(&admg, &xs, &ys, &zs).unwrap(),
                        "x={x} y={y} z={z:?}"
                    );
                }
            }
        }
    }
}
