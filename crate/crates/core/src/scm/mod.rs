//! Typed structural causal models over mixed domains.
//!
//! A graph is a list of [`NodeSpec`]s; edges are derived from each node's
//! mechanism (parent roles point at node ids). Graphs are plain data,
//! immutable after validation, and cheap to clone for graph surgery.

mod ops;
pub(crate) mod validate;

pub use ops::{Intervention, InterventionKind};
pub use validate::{validate as validate_graph, Issue, ValidationReport};

use crate::distribution::Distribution;
use crate::value::Domain;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Dense node index, `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Visibility {
    Observable,
    Latent,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScmError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("unknown node name `{0}`")]
    UnknownName(String),
    #[error("graph contains a cycle through [{0}]")]
    Cyclic(String),
    #[error("value {value} does not lie in the domain of node `{node}`")]
    DomainMismatch { node: String, value: String },
    #[error("mechanism references node id {0} outside the graph")]
    DanglingParent(NodeId),
}

/// Parameters of one conditional-Gaussian table entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEntry {
    pub mu: f64,
    pub sigma: f64,
}

/// Total mapping from categorical-parent value tuples to entries. Keys are
/// tuples of category indices, one per parent, kept sorted for canonical
/// serialization and binary-search lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable<T> {
    pub entries: Vec<(Vec<u32>, T)>,
}

impl<T> ConditionalTable<T> {
    pub fn new(mut entries: Vec<(Vec<u32>, T)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        ConditionalTable { entries }
    }

    pub fn get(&self, key: &[u32]) -> Option<&T> {
        self.entries
            .binary_search_by(|(k, _)| k.as_slice().cmp(key))
            .ok()
            .map(|i| &self.entries[i].1)
    }
}

/// Identifier of a press-fit physics operation usable as a structural
/// equation. Machine-dependent reference values are carried as constants of
/// the binding; the remaining quantities arrive as parent values, in the
/// argument order documented per variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FormulaId {
    /// args: [e_bore, e_mv]
    EffectiveElasticity,
    /// args: [d_mv_max, d_bore_min]
    DeltaDMax,
    /// args: [d_mv_min, d_bore_max]
    DeltaDMin,
    /// args: [dd_mean, e_eff]
    PfStiffness { k_ref: f64, dd_ref: f64, e_ref: f64 },
    /// args: [k_pf]
    TotalStiffness { k_machine: f64 },
    /// args: [l_mv_pf, k_stiff_pf]
    PressingForce,
    /// args: [force, k_stiff]
    DeltaSGrad,
    /// args: [ds_grad]
    SGrad { s0: f64 },
    /// args: [df_trigger_stop]
    DeltaSMax { k_machine: f64 },
    /// Max-reduction over the chamber's bore forces. args: [f_max; 1..]
    ChamberMaxForce,
    /// args: [f_max_chamber]
    DeltaForceRelu { f_lim: f64 },
    /// args: [d_force_relu]
    LeakTolMachine { leak_tol_0: f64, leak_tol_ref: f64, d_force_ref: f64 },
    /// args: [dd_max, dd_min, leak_tol]
    LeakAreaPf { beta_asym: f64 },
}

impl FormulaId {
    /// Expected argument count; `None` for variadic (at least one).
    pub fn arity(&self) -> Option<usize> {
        match self {
            FormulaId::EffectiveElasticity
            | FormulaId::DeltaDMax
            | FormulaId::DeltaDMin
            | FormulaId::PfStiffness { .. }
            | FormulaId::PressingForce
            | FormulaId::DeltaSGrad => Some(2),
            FormulaId::TotalStiffness { .. }
            | FormulaId::SGrad { .. }
            | FormulaId::DeltaSMax { .. }
            | FormulaId::DeltaForceRelu { .. }
            | FormulaId::LeakTolMachine { .. } => Some(1),
            FormulaId::LeakAreaPf { .. } => Some(3),
            FormulaId::ChamberMaxForce => None,
        }
    }

    /// Constants must be finite and respect the physics preconditions.
    pub fn check_constants(&self) -> Result<(), String> {
        let pos = |x: f64, n: &str| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(format!("{n} must be positive, got {x}"))
            }
        };
        let fin = |x: f64, n: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{n} must be finite"))
            }
        };
        match self {
            FormulaId::PfStiffness { k_ref, dd_ref, e_ref } => {
                pos(*k_ref, "k_ref")?;
                pos(*dd_ref, "dd_ref")?;
                pos(*e_ref, "e_ref")
            }
            FormulaId::TotalStiffness { k_machine } | FormulaId::DeltaSMax { k_machine } => {
                pos(*k_machine, "k_machine")
            }
            FormulaId::SGrad { s0 } => fin(*s0, "s0"),
            FormulaId::DeltaForceRelu { f_lim } => fin(*f_lim, "f_lim"),
            FormulaId::LeakTolMachine { leak_tol_0, leak_tol_ref, d_force_ref } => {
                fin(*leak_tol_0, "leak_tol_0")?;
                pos(*leak_tol_ref, "leak_tol_ref")?;
                pos(*d_force_ref, "d_force_ref")
            }
            FormulaId::LeakAreaPf { beta_asym } => {
                if beta_asym.is_finite() && (0.0..=1.0).contains(beta_asym) {
                    Ok(())
                } else {
                    Err(format!("beta_asym must lie in [0, 1], got {beta_asym}"))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Structural equation of one node: a closed tagged union, so the whole DGP
/// is serializable and mechanisms can be tested exhaustively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Mechanism {
    /// A press-fit physics operation over continuous parents, with optional
    /// additive noise.
    PhysicsFormula {
        formula: FormulaId,
        args: Vec<NodeId>,
        noise: Option<Distribution>,
    },
    /// Gaussian whose (mu, sigma) are selected by the joint value of
    /// categorical parents; optionally truncated from below.
    ConditionalGaussian {
        parents: Vec<NodeId>,
        table: ConditionalTable<GaussianEntry>,
        truncation: Option<f64>,
    },
    /// Categorical whose probability vector is selected by the joint value
    /// of categorical parents.
    ConditionalCategorical {
        parents: Vec<NodeId>,
        table: ConditionalTable<Vec<f64>>,
    },
    /// Boolean conformance flag: monitored value within [ltl, utl].
    ToleranceCheck {
        monitored: NodeId,
        ltl: NodeId,
        utl: NodeId,
    },
    /// Conjunction of boolean parents.
    LogicalAnd { parents: Vec<NodeId> },
    /// Sum of continuous parents.
    Sum { parents: Vec<NodeId> },
    /// max(0, parent).
    Relu { parent: NodeId },
    /// Root noise source.
    ExogenousNoise { distribution: Distribution },
    /// `beta * hi + (1 - beta) * lo`.
    AffineMix { beta: f64, hi: NodeId, lo: NodeId },
}

impl Mechanism {
    /// Parents in role order. Stable: this order defines the edge roles,
    /// table key layout and formula argument binding.
    pub fn parent_ids(&self) -> Vec<NodeId> {
        match self {
            Mechanism::PhysicsFormula { args, .. } => args.clone(),
            Mechanism::ConditionalGaussian { parents, .. }
            | Mechanism::ConditionalCategorical { parents, .. }
            | Mechanism::LogicalAnd { parents }
            | Mechanism::Sum { parents } => parents.clone(),
            Mechanism::ToleranceCheck { monitored, ltl, utl } => vec![*monitored, *ltl, *utl],
            Mechanism::Relu { parent } => vec![*parent],
            Mechanism::ExogenousNoise { .. } => Vec::new(),
            Mechanism::AffineMix { hi, lo, .. } => vec![*hi, *lo],
        }
    }
}

/// One variable of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    /// Dot-free identifier, unique within the graph.
    pub name: String,
    pub domain: Domain,
    pub visibility: Visibility,
    pub mechanism: Mechanism,
}

/// A structural causal model: nodes plus metadata. Edges are derived from
/// mechanisms. `parameter_nodes` designates the batch-level knobs (supplier
/// and product-type roots) that schedules may pin or redraw per batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmGraph {
    pub name: String,
    pub version: String,
    pub nodes: Vec<NodeSpec>,
    pub parameter_nodes: Vec<NodeId>,
}

impl ScmGraph {
    pub fn new(name: &str, version: &str, nodes: Vec<NodeSpec>) -> Self {
        ScmGraph {
            name: name.to_string(),
            version: version.to_string(),
            nodes,
            parameter_nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeSpec, ScmError> {
        self.nodes.get(id.index()).ok_or(ScmError::UnknownNode(id))
    }

    pub fn node_by_name(&self, name: &str) -> Result<&NodeSpec, ScmError> {
        self.nodes
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| ScmError::UnknownName(name.to_string()))
    }

    /// Parents of `node` in mechanism role order; stable across calls.
    pub fn parents(&self, node: NodeId) -> Result<Vec<NodeId>, ScmError> {
        Ok(self.node(node)?.mechanism.parent_ids())
    }

    /// Directed edge set (parent, child), sorted and deduplicated.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        for node in &self.nodes {
            for p in node.mechanism.parent_ids() {
                edges.push((p, node.id));
            }
        }
        edges.sort();
        edges.dedup();
        edges
    }

    /// Children adjacency, indexed by node id.
    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for (p, c) in self.edges() {
            ch[p.index()].push(c);
        }
        ch
    }

    pub fn observable_nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(|n| n.visibility == Visibility::Observable)
    }

    /// Stable content hash of the canonical serialization.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("graph serialization cannot fail");
        let digest = Sha256::digest(&bytes);
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Deterministic topological order, ties broken by ascending node id.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, ScmError> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for node in &self.nodes {
            let mut parents = node.mechanism.parent_ids();
            parents.sort();
            parents.dedup();
            for p in parents {
                if p.index() >= n {
                    return Err(ScmError::DanglingParent(p));
                }
                indegree[node.id.index()] += 1;
                children[p.index()].push(node.id);
            }
        }
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<NodeId>> = (0..n)
            .filter(|&i| indegree[i] == 0)
            .map(|i| std::cmp::Reverse(NodeId(i as u32)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(id)) = ready.pop() {
            order.push(id);
            for &c in &children[id.index()] {
                indegree[c.index()] -= 1;
                if indegree[c.index()] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if order.len() != n {
            let stuck: Vec<String> = (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.nodes[i].name.clone())
                .collect();
            return Err(ScmError::Cyclic(stuck.join(", ")));
        }
        Ok(order)
    }
}
