//! Deterministic simulator of a press-fit manufacturing data-generating
//! process: typed structural causal models with physics-based mechanisms,
//! batch-wise ancestral sampling, interventions, latent projection to ADMGs,
//! ground-truth treatment-effect oracles and evaluation metrics.

pub mod distribution;
pub mod line;
pub mod metrics;
pub mod physics;
pub mod projection;
pub mod rng;
pub mod sampling;
pub mod scm;
pub mod tasks;
pub mod value;

pub use distribution::Distribution;
pub use scm::{
    ConditionalTable, FormulaId, GaussianEntry, Intervention, InterventionKind, Mechanism, NodeId,
    NodeSpec, ScmError, ScmGraph, ValidationReport, Visibility,
};
pub use value::{Domain, Value};

/// Validate a graph: the report is empty iff all type invariants hold and
/// the graph is acyclic.
pub fn validate(graph: &ScmGraph) -> ValidationReport {
    scm::validate_graph(graph)
}
