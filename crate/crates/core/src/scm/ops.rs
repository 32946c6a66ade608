//! Interventions: graph surgery on mechanisms.

use super::{Mechanism, NodeId, ScmError, ScmGraph};
use crate::distribution::Distribution;
use crate::value::Value;
use serde::{Deserialize, Serialize};

/// One intervention on one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub target: NodeId,
    pub kind: InterventionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InterventionKind {
    /// Atomic: the mechanism becomes a point mass and all incoming edges
    /// disappear (mutilated-graph semantics).
    Hard(Value),
    /// The mechanism is replaced wholesale; edges follow the replacement's
    /// parent bindings.
    Soft(Mechanism),
}

impl Intervention {
    pub fn hard(target: NodeId, value: Value) -> Self {
        Intervention { target, kind: InterventionKind::Hard(value) }
    }

    pub fn soft(target: NodeId, mechanism: Mechanism) -> Self {
        Intervention { target, kind: InterventionKind::Soft(mechanism) }
    }
}

impl ScmGraph {
    /// Apply an intervention, returning the mutilated graph. The original is
    /// untouched; visibility of the target is preserved (interventions on
    /// latent nodes are allowed).
    ///
    /// Hard interventions check that the value lies in the target's domain.
    /// Soft replacements check that parent references resolve; acyclicity of
    /// the result is the caller's concern (re-validate before sampling).
    pub fn intervene(&self, intervention: &Intervention) -> Result<ScmGraph, ScmError> {
        let target = intervention.target;
        let node = self.node(target)?;
        let mechanism = match &intervention.kind {
            InterventionKind::Hard(value) => {
                if !node.domain.contains(value) {
                    return Err(ScmError::DomainMismatch {
                        node: node.name.clone(),
                        value: value.to_string(),
                    });
                }
                Mechanism::ExogenousNoise {
                    distribution: Distribution::PointMass { value: *value },
                }
            }
            InterventionKind::Soft(mechanism) => {
                for p in mechanism.parent_ids() {
                    if p.index() >= self.nodes.len() {
                        return Err(ScmError::DanglingParent(p));
                    }
                }
                mechanism.clone()
            }
        };
        let mut out = self.clone();
        out.nodes[target.index()].mechanism = mechanism;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::validate::validate;
    use crate::scm::{NodeSpec, Visibility};
    use crate::value::Domain;

    fn chain() -> ScmGraph {
        let a = NodeSpec {
            id: NodeId(0),
            name: "A".into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Observable,
            mechanism: Mechanism::ExogenousNoise {
                distribution: Distribution::Gaussian { mu: 0.0, sigma: 1.0 },
            },
        };
        let b = NodeSpec {
            id: NodeId(1),
            name: "B".into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Relu { parent: NodeId(0) },
        };
        let c = NodeSpec {
            id: NodeId(2),
            name: "C".into(),
            domain: Domain::continuous(""),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Relu { parent: NodeId(1) },
        };
        ScmGraph::new("chain", "1", vec![a, b, c])
    }

    #[test]
    fn hard_intervention_severs_incoming_edges() {
        let g = chain();
        let after = g
            .intervene(&Intervention::hard(NodeId(1), Value::Real(1.0)))
            .unwrap();
        assert!(after.parents(NodeId(1)).unwrap().is_empty());
        assert_eq!(
            after.nodes[1].mechanism,
            Mechanism::ExogenousNoise {
                distribution: Distribution::PointMass { value: Value::Real(1.0) }
            }
        );
        // Other nodes and the original graph are untouched.
        assert_eq!(after.nodes[0], g.nodes[0]);
        assert_eq!(after.nodes[2], g.nodes[2]);
        assert_eq!(g.parents(NodeId(1)).unwrap(), vec![NodeId(0)]);
        assert_eq!(after.edges(), vec![(NodeId(1), NodeId(2))]);
    }

    #[test]
    fn soft_intervention_keeps_declared_parents() {
        let g = chain();
        let replacement = Mechanism::Sum { parents: vec![NodeId(0)] };
        let after = g
            .intervene(&Intervention::soft(NodeId(1), replacement.clone()))
            .unwrap();
        assert_eq!(after.nodes[1].mechanism, replacement);
        assert!(after.edges().contains(&(NodeId(0), NodeId(1))));
    }

    #[test]
    fn latent_target_stays_latent() {
        let mut g = chain();
        g.nodes[1].visibility = Visibility::Latent;
        let after = g
            .intervene(&Intervention::hard(NodeId(1), Value::Real(2.0)))
            .unwrap();
        assert_eq!(after.nodes[1].visibility, Visibility::Latent);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let mut g = chain();
        g.nodes[2].domain = Domain::Boolean;
        g.nodes[2].mechanism = Mechanism::ExogenousNoise {
            distribution: Distribution::PointMass { value: Value::Bool(true) },
        };
        let err = g
            .intervene(&Intervention::hard(NodeId(2), Value::Real(0.5)))
            .unwrap_err();
        assert!(matches!(err, ScmError::DomainMismatch { .. }));
        assert!(g.intervene(&Intervention::hard(NodeId(9), Value::Real(0.0))).is_err());
    }

    #[test]
    fn hard_intervention_is_idempotent_and_preserves_validity() {
        let g = chain();
        assert!(validate(&g).is_ok());
        let i = Intervention::hard(NodeId(1), Value::Real(1.0));
        let once = g.intervene(&i).unwrap();
        let twice = once.intervene(&i).unwrap();
        assert_eq!(once, twice);
        assert!(validate(&once).is_ok());
    }
}
