//! Graph validation. Report-carrying: every violated invariant becomes an
//! issue; an empty report means the graph is well-formed and acyclic.

use super::{Mechanism, NodeId, ScmGraph};
use crate::distribution::{Distribution, PROB_SUM_TOL};
use crate::value::Domain;
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    IdMismatch { position: usize, id: NodeId },
    DuplicateName { name: String },
    MalformedName { name: String },
    EmptyCategoricalLabels { node: String },
    DuplicateCategoryLabel { node: String, label: String },
    UnknownParent { node: String, parent: NodeId },
    WrongArity { node: String, expected: String, got: usize },
    WrongParentDomain { node: String, parent: String, expected: &'static str },
    WrongOutputDomain { node: String, expected: &'static str },
    IncompleteTable { node: String, missing_key: Vec<u32> },
    SurplusTableEntry { node: String, key: Vec<u32> },
    BadProbabilityVector { node: String, detail: String },
    BadDistribution { node: String, detail: String },
    BadConstant { node: String, detail: String },
    BadParameterNode { node: String, detail: String },
    Cycle { names: Vec<String> },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::IdMismatch { position, id } => {
                write!(f, "node at position {position} carries id {id}; ids must be dense 0..n-1")
            }
            Issue::DuplicateName { name } => write!(f, "duplicate node name `{name}`"),
            Issue::MalformedName { name } => {
                write!(f, "node name `{name}` must be a non-empty dot-free identifier")
            }
            Issue::EmptyCategoricalLabels { node } => {
                write!(f, "`{node}`: categorical label list is empty")
            }
            Issue::DuplicateCategoryLabel { node, label } => {
                write!(f, "`{node}`: duplicate category label `{label}`")
            }
            Issue::UnknownParent { node, parent } => {
                write!(f, "`{node}`: parent id {parent} does not exist")
            }
            Issue::WrongArity { node, expected, got } => {
                write!(f, "`{node}`: expected {expected} parents, got {got}")
            }
            Issue::WrongParentDomain { node, parent, expected } => {
                write!(f, "`{node}`: parent `{parent}` must be {expected}")
            }
            Issue::WrongOutputDomain { node, expected } => {
                write!(f, "`{node}`: mechanism produces {expected} values")
            }
            Issue::IncompleteTable { node, missing_key } => {
                write!(f, "`{node}`: incomplete table, missing key {missing_key:?}")
            }
            Issue::SurplusTableEntry { node, key } => {
                write!(f, "`{node}`: table entry {key:?} outside the parent category product")
            }
            Issue::BadProbabilityVector { node, detail } => {
                write!(f, "`{node}`: bad probability vector ({detail})")
            }
            Issue::BadDistribution { node, detail } => write!(f, "`{node}`: {detail}"),
            Issue::BadConstant { node, detail } => write!(f, "`{node}`: {detail}"),
            Issue::BadParameterNode { node, detail } => write!(f, "`{node}`: {detail}"),
            Issue::Cycle { names } => write!(f, "cycle through [{}]", names.join(", ")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "ok")
        } else {
            for issue in &self.issues {
                writeln!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

fn name_ok(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Check all type invariants and acyclicity.
pub fn validate(graph: &ScmGraph) -> ValidationReport {
    let mut issues = Vec::new();
    let n = graph.nodes.len();

    for (position, node) in graph.nodes.iter().enumerate() {
        if node.id.index() != position {
            issues.push(Issue::IdMismatch { position, id: node.id });
        }
        if !name_ok(&node.name) {
            issues.push(Issue::MalformedName { name: node.name.clone() });
        }
        if let Domain::Categorical { labels } = &node.domain {
            if labels.is_empty() {
                issues.push(Issue::EmptyCategoricalLabels { node: node.name.clone() });
            }
            let mut seen = HashSet::new();
            for label in labels {
                if !seen.insert(label) {
                    issues.push(Issue::DuplicateCategoryLabel {
                        node: node.name.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
    }

    let mut names = HashSet::new();
    for node in &graph.nodes {
        if !names.insert(node.name.as_str()) {
            issues.push(Issue::DuplicateName { name: node.name.clone() });
        }
    }

    for node in &graph.nodes {
        check_mechanism(graph, node.id, &mut issues);
    }

    for &p in &graph.parameter_nodes {
        if p.index() >= n {
            issues.push(Issue::BadParameterNode {
                node: format!("#{p}"),
                detail: "designated parameter node does not exist".into(),
            });
        } else if !graph.nodes[p.index()].mechanism.parent_ids().is_empty() {
            issues.push(Issue::BadParameterNode {
                node: graph.nodes[p.index()].name.clone(),
                detail: "parameter nodes must be roots".into(),
            });
        }
    }

    if let Some(cycle) = find_cycle(graph) {
        issues.push(Issue::Cycle { names: cycle });
    }

    ValidationReport { issues }
}

fn check_mechanism(graph: &ScmGraph, id: NodeId, issues: &mut Vec<Issue>) {
    let node = &graph.nodes[id.index()];
    let name = node.name.clone();
    let n = graph.nodes.len();

    let parents = node.mechanism.parent_ids();
    for &p in &parents {
        if p.index() >= n {
            issues.push(Issue::UnknownParent { node: name.clone(), parent: p });
        }
    }
    // Domain checks below require resolvable parents.
    if parents.iter().any(|p| p.index() >= n) {
        return;
    }

    let parent_dom = |p: NodeId| &graph.nodes[p.index()].domain;
    let parent_name = |p: NodeId| graph.nodes[p.index()].name.clone();
    let require_continuous_parents = |ps: &[NodeId], issues: &mut Vec<Issue>| {
        for &p in ps {
            if !parent_dom(p).is_continuous() {
                issues.push(Issue::WrongParentDomain {
                    node: name.clone(),
                    parent: parent_name(p),
                    expected: "continuous",
                });
            }
        }
    };

    let require_output = |domain_ok: bool, expected: &'static str, issues: &mut Vec<Issue>| {
        if !domain_ok {
            issues.push(Issue::WrongOutputDomain { node: name.clone(), expected });
        }
    };

    match &node.mechanism {
        Mechanism::PhysicsFormula { formula, args, noise } => {
            match formula.arity() {
                Some(k) if args.len() != k => issues.push(Issue::WrongArity {
                    node: name.clone(),
                    expected: k.to_string(),
                    got: args.len(),
                }),
                None if args.is_empty() => issues.push(Issue::WrongArity {
                    node: name.clone(),
                    expected: "at least 1".into(),
                    got: 0,
                }),
                _ => {}
            }
            require_continuous_parents(args, issues);
            if let Err(detail) = formula.check_constants() {
                issues.push(Issue::BadConstant { node: name.clone(), detail });
            }
            if let Some(d) = noise {
                if let Err(detail) = d.check() {
                    issues.push(Issue::BadDistribution { node: name.clone(), detail });
                } else if matches!(d, Distribution::PointMass { .. } | Distribution::CategoricalDist { .. })
                {
                    issues.push(Issue::BadDistribution {
                        node: name.clone(),
                        detail: "formula noise must be a real-valued distribution".into(),
                    });
                }
            }
            require_output(node.domain.is_continuous(), "continuous", issues);
        }
        Mechanism::ConditionalGaussian { parents, table, truncation } => {
            check_table_keys(graph, &name, parents, &table.entries, issues, |entry, node, issues| {
                if !entry.mu.is_finite() || !entry.sigma.is_finite() || entry.sigma <= 0.0 {
                    issues.push(Issue::BadDistribution {
                        node: node.to_string(),
                        detail: format!("table entry requires finite mu and positive sigma, got ({}, {})", entry.mu, entry.sigma),
                    });
                }
            });
            if let Some(lower) = truncation {
                if !lower.is_finite() {
                    issues.push(Issue::BadConstant {
                        node: name.clone(),
                        detail: "truncation bound must be finite".into(),
                    });
                }
            }
            require_output(node.domain.is_continuous(), "continuous", issues);
        }
        Mechanism::ConditionalCategorical { parents, table } => {
            let card = node.domain.cardinality();
            check_table_keys(graph, &name, parents, &table.entries, issues, |probs, node, issues| {
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > PROB_SUM_TOL {
                    issues.push(Issue::BadProbabilityVector {
                        node: node.to_string(),
                        detail: format!("entries must be non-negative and sum to 1, got sum {sum}"),
                    });
                }
                if let Some(card) = card {
                    if probs.len() != card as usize {
                        issues.push(Issue::BadProbabilityVector {
                            node: node.to_string(),
                            detail: format!("vector length {} does not match cardinality {card}", probs.len()),
                        });
                    }
                }
            });
            require_output(node.domain.cardinality().is_some(), "categorical", issues);
        }
        Mechanism::ToleranceCheck { monitored, ltl, utl } => {
            require_continuous_parents(&[*monitored, *ltl, *utl], issues);
            require_output(node.domain == Domain::Boolean, "boolean", issues);
        }
        Mechanism::LogicalAnd { parents } => {
            if parents.is_empty() {
                issues.push(Issue::WrongArity {
                    node: name.clone(),
                    expected: "at least 1".into(),
                    got: 0,
                });
            }
            for &p in parents {
                if *parent_dom(p) != Domain::Boolean {
                    issues.push(Issue::WrongParentDomain {
                        node: name.clone(),
                        parent: parent_name(p),
                        expected: "boolean",
                    });
                }
            }
            require_output(node.domain == Domain::Boolean, "boolean", issues);
        }
        Mechanism::Sum { parents } => {
            if parents.is_empty() {
                issues.push(Issue::WrongArity {
                    node: name.clone(),
                    expected: "at least 1".into(),
                    got: 0,
                });
            }
            require_continuous_parents(parents, issues);
            require_output(node.domain.is_continuous(), "continuous", issues);
        }
        Mechanism::Relu { parent } => {
            require_continuous_parents(&[*parent], issues);
            require_output(node.domain.is_continuous(), "continuous", issues);
        }
        Mechanism::ExogenousNoise { distribution } => {
            if let Err(detail) = distribution.check() {
                issues.push(Issue::BadDistribution { node: name.clone(), detail });
            } else {
                let ok = match distribution {
                    Distribution::PointMass { value } => node.domain.contains(value),
                    Distribution::CategoricalDist { probabilities } => {
                        node.domain.cardinality().map(u64::from) == Some(probabilities.len() as u64)
                            && !node.domain.is_continuous()
                    }
                    _ => node.domain.is_continuous(),
                };
                if !ok {
                    issues.push(Issue::BadDistribution {
                        node: name.clone(),
                        detail: "distribution does not match the node domain".into(),
                    });
                }
            }
        }
        Mechanism::AffineMix { beta, hi, lo } => {
            if !beta.is_finite() || !(0.0..=1.0).contains(beta) {
                issues.push(Issue::BadConstant {
                    node: name.clone(),
                    detail: format!("beta must lie in [0, 1], got {beta}"),
                });
            }
            require_continuous_parents(&[*hi, *lo], issues);
            require_output(node.domain.is_continuous(), "continuous", issues);
        }
    }
}

/// Tables must be total over the Cartesian product of parent categories and
/// carry no surplus keys; each entry is checked by `check_entry`.
fn check_table_keys<T>(
    graph: &ScmGraph,
    name: &str,
    parents: &[NodeId],
    entries: &[(Vec<u32>, T)],
    issues: &mut Vec<Issue>,
    check_entry: impl Fn(&T, &str, &mut Vec<Issue>),
) {
    let mut cards = Vec::with_capacity(parents.len());
    for &p in parents {
        match graph.nodes[p.index()].domain.cardinality() {
            Some(c) if c > 0 => cards.push(c),
            _ => {
                issues.push(Issue::WrongParentDomain {
                    node: name.to_string(),
                    parent: graph.nodes[p.index()].name.clone(),
                    expected: "categorical or discrete",
                });
                return;
            }
        }
    }

    let mut seen: HashSet<&[u32]> = HashSet::new();
    for (key, entry) in entries {
        let in_product = key.len() == cards.len()
            && key.iter().zip(&cards).all(|(k, c)| k < c);
        if !in_product || !seen.insert(key.as_slice()) {
            issues.push(Issue::SurplusTableEntry { node: name.to_string(), key: key.clone() });
            continue;
        }
        check_entry(entry, name, issues);
    }

    let total: u64 = cards.iter().map(|&c| u64::from(c)).product();
    if (seen.len() as u64) < total {
        // Report the first missing key for actionable output.
        let mut key = vec![0u32; cards.len()];
        loop {
            if !seen.contains(key.as_slice()) {
                issues.push(Issue::IncompleteTable {
                    node: name.to_string(),
                    missing_key: key.clone(),
                });
                break;
            }
            let mut i = key.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                key[i] += 1;
                if key[i] < cards[i] {
                    break;
                }
                key[i] = 0;
            }
        }
    }
}

/// DFS cycle search returning the offending node name sequence.
fn find_cycle(graph: &ScmGraph) -> Option<Vec<String>> {
    let n = graph.nodes.len();
    // 0 = white, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<NodeId> = Vec::new();

    fn dfs(
        graph: &ScmGraph,
        v: usize,
        state: &mut [u8],
        stack: &mut Vec<NodeId>,
    ) -> Option<Vec<String>> {
        state[v] = 1;
        stack.push(NodeId(v as u32));
        let mut parents = graph.nodes[v].mechanism.parent_ids();
        parents.sort();
        parents.dedup();
        for p in parents {
            if p.index() >= graph.nodes.len() {
                continue;
            }
            match state[p.index()] {
                0 => {
                    if let Some(c) = dfs(graph, p.index(), state, stack) {
                        return Some(c);
                    }
                }
                1 => {
                    let start = stack.iter().position(|&x| x == p).unwrap();
                    let mut names: Vec<String> = stack[start..]
                        .iter()
                        .map(|id| graph.nodes[id.index()].name.clone())
                        .collect();
                    names.sort();
                    return Some(names);
                }
                _ => {}
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }

    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = dfs(graph, v, &mut state, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{ConditionalTable, GaussianEntry, Mechanism, NodeSpec, Visibility};
    use crate::value::Domain;

    fn cat_root(id: u32, name: &str, labels: &[&str]) -> NodeSpec {
        let k = labels.len();
        NodeSpec {
            id: NodeId(id),
            name: name.into(),
            domain: Domain::categorical(labels),
            visibility: Visibility::Observable,
            mechanism: Mechanism::ExogenousNoise {
                distribution: Distribution::CategoricalDist {
                    probabilities: vec![1.0 / k as f64; k],
                },
            },
        }
    }

    fn relu(id: u32, name: &str, parent: u32) -> NodeSpec {
        NodeSpec {
            id: NodeId(id),
            name: name.into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Relu { parent: NodeId(parent) },
        }
    }

    fn gauss(id: u32, name: &str) -> NodeSpec {
        NodeSpec {
            id: NodeId(id),
            name: name.into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Observable,
            mechanism: Mechanism::ExogenousNoise {
                distribution: Distribution::Gaussian { mu: 0.0, sigma: 1.0 },
            },
        }
    }

    #[test]
    fn minimal_valid_graph_reports_nothing() {
        let g = ScmGraph::new("g", "1", vec![gauss(0, "A"), relu(1, "B", 0)]);
        let report = validate(&g);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn smallest_cycle_names_both_nodes() {
        let g = ScmGraph::new("g", "1", vec![relu(0, "A", 1), relu(1, "B", 0)]);
        let report = validate(&g);
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, Issue::Cycle { names } if names == &vec!["A".to_string(), "B".to_string()])));
    }

    #[test]
    fn incomplete_conditional_table_is_reported() {
        let supplier = cat_root(0, "Supplier", &["s1", "s2"]);
        let node = NodeSpec {
            id: NodeId(1),
            name: "E".into(),
            domain: Domain::continuous("MPa"),
            visibility: Visibility::Latent,
            mechanism: Mechanism::ConditionalGaussian {
                parents: vec![NodeId(0)],
                table: ConditionalTable::new(vec![(vec![0], GaussianEntry { mu: 1.0, sigma: 0.1 })]),
                truncation: None,
            },
        };
        let g = ScmGraph::new("g", "1", vec![supplier, node]);
        let report = validate(&g);
        assert!(report
            .issues
            .iter()
            .any(|i| matches!(i, Issue::IncompleteTable { node, missing_key } if node == "E" && missing_key == &vec![1])));
    }

    #[test]
    fn probability_vectors_must_normalize() {
        let supplier = cat_root(0, "Supplier", &["s1", "s2"]);
        let node = NodeSpec {
            id: NodeId(1),
            name: "Grade".into(),
            domain: Domain::categorical(&["g1", "g2"]),
            visibility: Visibility::Observable,
            mechanism: Mechanism::ConditionalCategorical {
                parents: vec![NodeId(0)],
                table: ConditionalTable::new(vec![
                    (vec![0], vec![0.6, 0.4]),
                    (vec![1], vec![0.7, 0.7]),
                ]),
            },
        };
        let g = ScmGraph::new("g", "1", vec![supplier, node]);
        assert!(validate(&g)
            .issues
            .iter()
            .any(|i| matches!(i, Issue::BadProbabilityVector { .. })));
    }

    #[test]
    fn dangling_parent_and_bad_names() {
        let g = ScmGraph::new("g", "1", vec![relu(0, "A.dot", 7)]);
        let report = validate(&g);
        assert!(report.issues.iter().any(|i| matches!(i, Issue::UnknownParent { .. })));
        assert!(report.issues.iter().any(|i| matches!(i, Issue::MalformedName { .. })));
    }

    #[test]
    fn and_requires_boolean_parents() {
        let g = ScmGraph::new(
            "g",
            "1",
            vec![
                gauss(0, "X"),
                NodeSpec {
                    id: NodeId(1),
                    name: "All".into(),
                    domain: Domain::Boolean,
                    visibility: Visibility::Observable,
                    mechanism: Mechanism::LogicalAnd { parents: vec![NodeId(0)] },
                },
            ],
        );
        assert!(validate(&g)
            .issues
            .iter()
            .any(|i| matches!(i, Issue::WrongParentDomain { expected: "boolean", .. })));
    }

    #[test]
    fn surplus_table_entry_is_reported() {
        let supplier = cat_root(0, "S", &["a", "b"]);
        let node = NodeSpec {
            id: NodeId(1),
            name: "E".into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Latent,
            mechanism: Mechanism::ConditionalGaussian {
                parents: vec![NodeId(0)],
                table: ConditionalTable::new(vec![
                    (vec![0], GaussianEntry { mu: 0.0, sigma: 1.0 }),
                    (vec![1], GaussianEntry { mu: 1.0, sigma: 1.0 }),
                    (vec![2], GaussianEntry { mu: 2.0, sigma: 1.0 }),
                ]),
                truncation: None,
            },
        };
        let g = ScmGraph::new("g", "1", vec![supplier, node]);
        assert!(validate(&g)
            .issues
            .iter()
            .any(|i| matches!(i, Issue::SurplusTableEntry { key, .. } if key == &vec![2])));
    }
}
