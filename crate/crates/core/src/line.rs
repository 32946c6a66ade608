//! Parametric construction of production-line SCMs: machines pressing
//! magnetic valves into hydraulic-unit bores, with supplier/product-type
//! conditional dependencies, the full press-fit physics chain, quality
//! monitoring and per-machine process results.
//!
//! Shipped presets (`small`, `medium`) are repo-chosen parametrizations; the
//! golden census pins their exact shape.

use crate::distribution::Distribution;
use crate::physics::MachineParams;
use crate::projection::latent_project;
use crate::scm::{
    ConditionalTable, FormulaId, GaussianEntry, Mechanism, NodeId, NodeSpec, ScmGraph, Visibility,
};
use crate::value::{Domain, Value};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("config invalid: {0}")]
    Invalid(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("built graph failed validation:\n{0}")]
    Validation(String),
}

/// Which categoricals select a physical parameter's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conditioning {
    Supplier,
    Type,
    SupplierAndType,
}

/// Distribution family of one physical parameter, expanded into a
/// conditional-Gaussian table over the configured categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub conditioning: Conditioning,
    pub base_mu: f64,
    pub sigma: f64,
    /// Additive mean shifts per supplier / product type. Empty = zeros.
    #[serde(default)]
    pub supplier_delta: Vec<f64>,
    #[serde(default)]
    pub type_delta: Vec<f64>,
    /// Multiplicative sigma scales. Empty = ones.
    #[serde(default)]
    pub supplier_sigma_scale: Vec<f64>,
    #[serde(default)]
    pub type_sigma_scale: Vec<f64>,
    pub truncation: Option<f64>,
}

impl ParamSpec {
    fn mu(&self, sup: usize, ty: usize) -> f64 {
        let s = self.supplier_delta.get(sup).copied().unwrap_or(0.0);
        let t = self.type_delta.get(ty).copied().unwrap_or(0.0);
        match self.conditioning {
            Conditioning::Supplier => self.base_mu + s,
            Conditioning::Type => self.base_mu + t,
            Conditioning::SupplierAndType => self.base_mu + s + t,
        }
    }

    fn sigma(&self, sup: usize, ty: usize) -> f64 {
        let s = self.supplier_sigma_scale.get(sup).copied().unwrap_or(1.0);
        let t = self.type_sigma_scale.get(ty).copied().unwrap_or(1.0);
        match self.conditioning {
            Conditioning::Supplier => self.sigma * s,
            Conditioning::Type => self.sigma * t,
            Conditioning::SupplierAndType => self.sigma * s * t,
        }
    }
}

/// Physical parameter tables: magnetic-valve properties keyed by
/// (MV supplier, type), hydraulic-unit and bore properties keyed by
/// (HU supplier, type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTables {
    pub e_mv: ParamSpec,
    pub d_mv_max: ParamSpec,
    pub d_mv_min: ParamSpec,
    pub l_mv_pf: ParamSpec,
    pub a_leak_raw: ParamSpec,
    pub e_hu: ParamSpec,
    /// Per-bore positive deviation added to the HU elasticity.
    pub e_bore_dev: Distribution,
    pub d_bore_max: ParamSpec,
    pub d_bore_min: ParamSpec,
}

/// Per-type tolerance window of one monitored attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub ltl: Vec<f64>,
    pub utl: Vec<f64>,
    /// Sigma of the tolerance nodes (small: windows are per-type settings).
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceWindows {
    pub force: Window,
    pub s_max: Window,
    /// Leak lower limit is the constant 0; only the upper limit varies.
    pub leak_utl: Vec<f64>,
    pub leak_sigma: f64,
}

/// Which attributes carry MpGood monitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorPolicy {
    pub force: bool,
    pub s_max: bool,
    pub leak: bool,
}

/// Observable/Latent assignment for the roles that vary between presets.
/// Material parameters, overshoots and leakage areas are always latent;
/// forces, monitors, supplier/type ids and process results are always
/// observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityPolicy {
    pub s_grad_observable: bool,
    pub f_max_chamber_observable: bool,
    pub leak_ltl_observable: bool,
}

/// Independent environment/log channel emitted alongside the line signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextChannel {
    pub suffix: String,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContextProfile {
    pub machine_observable: Vec<ContextChannel>,
    pub machine_latent: Vec<ContextChannel>,
    pub line_observable: Vec<ContextChannel>,
    pub line_latent: Vec<ContextChannel>,
}

/// Full parametric description of a production line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    pub name: String,
    pub version: String,
    /// Sections are named C2, C3, ... (C1 is the unmodeled intake).
    pub sections: u32,
    pub machines_per_section: u32,
    pub chambers_per_machine: u32,
    pub bores_per_chamber: u32,
    pub mv_suppliers: Vec<String>,
    pub mv_supplier_probs: Vec<f64>,
    pub hu_suppliers: Vec<String>,
    pub hu_supplier_probs: Vec<f64>,
    pub product_types: Vec<String>,
    pub product_type_probs: Vec<f64>,
    pub params: ParamTables,
    pub tolerances: ToleranceWindows,
    pub machine: MachineParams,
    /// Sigma of the half-normal trigger-stop force overshoot.
    pub trigger_sigma: f64,
    pub monitors: MonitorPolicy,
    pub visibility: VisibilityPolicy,
    pub context: ContextProfile,
}

impl LineConfig {
    fn check(&self) -> Result<(), BuildError> {
        let fail = |m: &str| Err(BuildError::Invalid(m.to_string()));
        if self.sections == 0
            || self.machines_per_section == 0
            || self.chambers_per_machine == 0
            || self.bores_per_chamber == 0
        {
            return fail("structure counts must be positive");
        }
        let prob_ok = |probs: &[f64], n: usize| {
            probs.len() == n && (probs.iter().sum::<f64>() - 1.0).abs() < 1e-9
        };
        if self.mv_suppliers.is_empty() || !prob_ok(&self.mv_supplier_probs, self.mv_suppliers.len()) {
            return fail("mv supplier labels/probabilities inconsistent");
        }
        if self.hu_suppliers.is_empty() || !prob_ok(&self.hu_supplier_probs, self.hu_suppliers.len()) {
            return fail("hu supplier labels/probabilities inconsistent");
        }
        if self.product_types.is_empty()
            || !prob_ok(&self.product_type_probs, self.product_types.len())
        {
            return fail("product type labels/probabilities inconsistent");
        }
        let n_types = self.product_types.len();
        let window_ok = |w: &Window| {
            w.ltl.len() == n_types
                && w.utl.len() == n_types
                && w.ltl.iter().zip(&w.utl).all(|(l, u)| l <= u)
                && w.sigma > 0.0
        };
        if self.monitors.force && !window_ok(&self.tolerances.force) {
            return fail("force tolerance window inconsistent");
        }
        if self.monitors.s_max && !window_ok(&self.tolerances.s_max) {
            return fail("s_max tolerance window inconsistent");
        }
        if self.monitors.leak
            && (self.tolerances.leak_utl.len() != n_types
                || self.tolerances.leak_utl.iter().any(|&u| u < 0.0)
                || self.tolerances.leak_sigma <= 0.0)
        {
            return fail("leak tolerance window inconsistent");
        }
        if !self.monitors.force && !self.monitors.s_max && !self.monitors.leak {
            return fail("at least one monitored attribute is required");
        }
        if self.trigger_sigma <= 0.0 || !self.trigger_sigma.is_finite() {
            return fail("trigger_sigma must be positive");
        }
        self.machine
            .check()
            .map_err(|e| BuildError::Invalid(e.to_string()))?;
        Ok(())
    }
}

/// Node/edge counts of a graph and its latent projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub total: usize,
    pub observable: usize,
    pub latent: usize,
    pub edges: usize,
    pub projected_nodes: usize,
    pub projected_directed: usize,
    pub projected_bidirected: usize,
    /// Pairs carrying both a directed and a bidirected edge.
    pub projected_pairs_with_both: usize,
}

/// Exact counts, with projected counts computed via latent projection.
pub fn node_census(graph: &ScmGraph) -> Census {
    let observable = graph.observable_nodes().count();
    let admg = latent_project(graph);
    Census {
        total: graph.len(),
        observable,
        latent: graph.len() - observable,
        edges: graph.edges().len(),
        projected_nodes: admg.nodes.len(),
        projected_directed: admg.directed.len(),
        projected_bidirected: admg.bidirected.len(),
        projected_pairs_with_both: admg.pairs_with_both(),
    }
}

/// Incrementally assembles the node list.
struct Assembler {
    nodes: Vec<NodeSpec>,
    parameter_nodes: Vec<NodeId>,
}

impl Assembler {
    fn add(
        &mut self,
        name: String,
        domain: Domain,
        visibility: Visibility,
        mechanism: Mechanism,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(NodeSpec { id, name, domain, visibility, mechanism });
        id
    }

    fn continuous(
        &mut self,
        name: String,
        unit: &str,
        visibility: Visibility,
        mechanism: Mechanism,
    ) -> NodeId {
        self.add(name, Domain::continuous(unit), visibility, mechanism)
    }
}

fn vis(observable: bool) -> Visibility {
    if observable {
        Visibility::Observable
    } else {
        Visibility::Latent
    }
}

/// Conditional-Gaussian table for one physical parameter, total over the
/// configured categories.
fn param_table(
    spec: &ParamSpec,
    supplier_node: NodeId,
    type_node: NodeId,
    n_suppliers: usize,
    n_types: usize,
) -> Mechanism {
    let mut entries = Vec::new();
    let (parents, keys): (Vec<NodeId>, Vec<Vec<u32>>) = match spec.conditioning {
        Conditioning::Supplier => (
            vec![supplier_node],
            (0..n_suppliers).map(|s| vec![s as u32]).collect(),
        ),
        Conditioning::Type => (
            vec![type_node],
            (0..n_types).map(|t| vec![t as u32]).collect(),
        ),
        Conditioning::SupplierAndType => (
            vec![supplier_node, type_node],
            (0..n_suppliers)
                .flat_map(|s| (0..n_types).map(move |t| vec![s as u32, t as u32]))
                .collect(),
        ),
    };
    for key in keys {
        let (s, t) = match spec.conditioning {
            Conditioning::Supplier => (key[0] as usize, 0),
            Conditioning::Type => (0, key[0] as usize),
            Conditioning::SupplierAndType => (key[0] as usize, key[1] as usize),
        };
        entries.push((key, GaussianEntry { mu: spec.mu(s, t), sigma: spec.sigma(s, t) }));
    }
    Mechanism::ConditionalGaussian {
        parents,
        table: ConditionalTable::new(entries),
        truncation: spec.truncation,
    }
}

/// Per-type tolerance node: a conditional Gaussian with small sigma, i.e. an
/// effectively fixed setting per product type.
fn tolerance_node(type_node: NodeId, values: &[f64], sigma: f64) -> Mechanism {
    let entries = values
        .iter()
        .enumerate()
        .map(|(t, &v)| (vec![t as u32], GaussianEntry { mu: v, sigma }))
        .collect();
    Mechanism::ConditionalGaussian {
        parents: vec![type_node],
        table: ConditionalTable::new(entries),
        truncation: None,
    }
}

/// Build the full line graph. The result always passes validation.
pub fn build(config: &LineConfig) -> Result<ScmGraph, BuildError> {
    config.check()?;
    let mut asm = Assembler { nodes: Vec::new(), parameter_nodes: Vec::new() };
    let n_mv_sup = config.mv_suppliers.len();
    let n_hu_sup = config.hu_suppliers.len();
    let n_types = config.product_types.len();
    let m = &config.machine;

    // Product type of the hydraulic block, shared by the whole line.
    let type_node = asm.add(
        "HU_HU_Block_Type_ID_num".into(),
        Domain::categorical(&config.product_types),
        Visibility::Observable,
        Mechanism::ExogenousNoise {
            distribution: Distribution::CategoricalDist {
                probabilities: config.product_type_probs.clone(),
            },
        },
    );
    asm.parameter_nodes.push(type_node);

    let mut global_machine = 0u32;
    for section_idx in 0..config.sections {
        let section = format!("C{}", section_idx + 2);

        let hu_supplier = asm.add(
            format!("Sec_{section}_HU_Supplier_ID"),
            Domain::categorical(&config.hu_suppliers),
            Visibility::Observable,
            Mechanism::ExogenousNoise {
                distribution: Distribution::CategoricalDist {
                    probabilities: config.hu_supplier_probs.clone(),
                },
            },
        );
        asm.parameter_nodes.push(hu_supplier);

        let e_hu = asm.continuous(
            format!("Sec_{section}_HU_Elasticity"),
            "MPa",
            Visibility::Latent,
            param_table(&config.params.e_hu, hu_supplier, type_node, n_hu_sup, n_types),
        );

        for local_machine in 0..config.machines_per_section {
            global_machine += 1;
            let g = global_machine;
            let mut machine_mp_goods: Vec<NodeId> = Vec::new();

            for chamber in 1..=config.chambers_per_machine {
                let mut bore_f_max: Vec<NodeId> = Vec::new();
                let mut bore_dd: Vec<(NodeId, NodeId)> = Vec::new();
                let mut bore_mv_leak: Vec<NodeId> = Vec::new();
                let mut bore_tool: Vec<u32> = Vec::new();

                for bore in 1..=config.bores_per_chamber {
                    let tool = (chamber - 1) * config.bores_per_chamber + bore;
                    let t = format!("PF_M{g}_T{tool}");
                    bore_tool.push(tool);

                    let mv_supplier = asm.add(
                        format!("{t}_MV_Supplier_ID"),
                        Domain::categorical(&config.mv_suppliers),
                        Visibility::Observable,
                        Mechanism::ExogenousNoise {
                            distribution: Distribution::CategoricalDist {
                                probabilities: config.mv_supplier_probs.clone(),
                            },
                        },
                    );
                    asm.parameter_nodes.push(mv_supplier);

                    let mk = |spec: &ParamSpec| {
                        param_table(spec, mv_supplier, type_node, n_mv_sup, n_types)
                    };
                    let e_mv = asm.continuous(
                        format!("{t}_MV_Elasticity"),
                        "MPa",
                        Visibility::Latent,
                        mk(&config.params.e_mv),
                    );
                    let d_mv_max = asm.continuous(
                        format!("{t}_MV_DiaMax"),
                        "mm",
                        Visibility::Latent,
                        mk(&config.params.d_mv_max),
                    );
                    let d_mv_min = asm.continuous(
                        format!("{t}_MV_DiaMin"),
                        "mm",
                        Visibility::Latent,
                        mk(&config.params.d_mv_min),
                    );
                    let axial_len = asm.continuous(
                        format!("{t}_MV_AxialLen"),
                        "mm",
                        Visibility::Latent,
                        mk(&config.params.l_mv_pf),
                    );
                    let leak_raw = asm.continuous(
                        format!("{t}_MV_LeakRaw"),
                        "mm2",
                        Visibility::Latent,
                        mk(&config.params.a_leak_raw),
                    );
                    let mv_leak = asm.continuous(
                        format!("{t}_MV_LeakArea"),
                        "mm2",
                        Visibility::Latent,
                        Mechanism::Relu { parent: leak_raw },
                    );
                    bore_mv_leak.push(mv_leak);

                    let hk = |spec: &ParamSpec| {
                        param_table(spec, hu_supplier, type_node, n_hu_sup, n_types)
                    };
                    let e_bore_dev = asm.continuous(
                        format!("{t}_Bore_ElasticityDev"),
                        "MPa",
                        Visibility::Latent,
                        Mechanism::ExogenousNoise {
                            distribution: config.params.e_bore_dev.clone(),
                        },
                    );
                    let e_bore = asm.continuous(
                        format!("{t}_Bore_Elasticity"),
                        "MPa",
                        Visibility::Latent,
                        Mechanism::Sum { parents: vec![e_hu, e_bore_dev] },
                    );
                    let d_bore_max = asm.continuous(
                        format!("{t}_Bore_DiaMax"),
                        "mm",
                        Visibility::Latent,
                        hk(&config.params.d_bore_max),
                    );
                    let d_bore_min = asm.continuous(
                        format!("{t}_Bore_DiaMin"),
                        "mm",
                        Visibility::Latent,
                        hk(&config.params.d_bore_min),
                    );

                    let dd_max = asm.continuous(
                        format!("{t}_DeltaDMax"),
                        "mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::DeltaDMax,
                            args: vec![d_mv_max, d_bore_min],
                            noise: None,
                        },
                    );
                    let dd_min = asm.continuous(
                        format!("{t}_DeltaDMin"),
                        "mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::DeltaDMin,
                            args: vec![d_mv_min, d_bore_max],
                            noise: None,
                        },
                    );
                    bore_dd.push((dd_max, dd_min));
                    let dd_mean = asm.continuous(
                        format!("{t}_DeltaDMean"),
                        "mm",
                        Visibility::Latent,
                        Mechanism::AffineMix { beta: m.beta_asym, hi: dd_max, lo: dd_min },
                    );
                    let e_eff = asm.continuous(
                        format!("{t}_EffElasticity"),
                        "MPa",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::EffectiveElasticity,
                            args: vec![e_bore, e_mv],
                            noise: None,
                        },
                    );
                    let k_pf = asm.continuous(
                        format!("{t}_StiffnessPF"),
                        "N_per_mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::PfStiffness {
                                k_ref: m.k_stiff_pf_ref,
                                dd_ref: m.k_stiff_pf_dd_ref,
                                e_ref: m.k_stiff_pf_e_ref,
                            },
                            args: vec![dd_mean, e_eff],
                            noise: None,
                        },
                    );
                    let k_total = asm.continuous(
                        format!("{t}_StiffnessTotal"),
                        "N_per_mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::TotalStiffness { k_machine: m.k_stiff_machine },
                            args: vec![k_pf],
                            noise: None,
                        },
                    );
                    let force = asm.continuous(
                        format!("{t}_Force"),
                        "N",
                        Visibility::Observable,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::PressingForce,
                            args: vec![axial_len, k_pf],
                            noise: None,
                        },
                    );
                    let ds_grad = asm.continuous(
                        format!("{t}_DeltaSGrad"),
                        "mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::DeltaSGrad,
                            args: vec![force, k_total],
                            noise: None,
                        },
                    );
                    let s_grad = asm.continuous(
                        format!("{t}_SGrad"),
                        "mm",
                        vis(config.visibility.s_grad_observable),
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::SGrad { s0: m.s0 },
                            args: vec![ds_grad],
                            noise: None,
                        },
                    );
                    let trigger = asm.continuous(
                        format!("{t}_TriggerStopDeltaF"),
                        "N",
                        Visibility::Latent,
                        Mechanism::ExogenousNoise {
                            distribution: Distribution::HalfNormal { sigma: config.trigger_sigma },
                        },
                    );
                    let f_max = asm.continuous(
                        format!("{t}_FMax"),
                        "N",
                        Visibility::Observable,
                        Mechanism::Sum { parents: vec![force, trigger] },
                    );
                    bore_f_max.push(f_max);
                    let ds_max = asm.continuous(
                        format!("{t}_DeltaSMax"),
                        "mm",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::DeltaSMax { k_machine: m.k_stiff_machine },
                            args: vec![trigger],
                            noise: None,
                        },
                    );
                    let s_max = asm.continuous(
                        format!("{t}_SMax"),
                        "mm",
                        Visibility::Observable,
                        Mechanism::Sum { parents: vec![s_grad, ds_max] },
                    );

                    if config.monitors.force {
                        let w = &config.tolerances.force;
                        let ltl = asm.continuous(
                            format!("{t}_Force_LTL"),
                            "N",
                            Visibility::Observable,
                            tolerance_node(type_node, &w.ltl, w.sigma),
                        );
                        let utl = asm.continuous(
                            format!("{t}_Force_UTL"),
                            "N",
                            Visibility::Observable,
                            tolerance_node(type_node, &w.utl, w.sigma),
                        );
                        let good = asm.add(
                            format!("{t}_Force_MpGood"),
                            Domain::Boolean,
                            Visibility::Observable,
                            Mechanism::ToleranceCheck { monitored: force, ltl, utl },
                        );
                        machine_mp_goods.push(good);
                    }
                    if config.monitors.s_max {
                        let w = &config.tolerances.s_max;
                        let ltl = asm.continuous(
                            format!("{t}_SMax_LTL"),
                            "mm",
                            Visibility::Observable,
                            tolerance_node(type_node, &w.ltl, w.sigma),
                        );
                        let utl = asm.continuous(
                            format!("{t}_SMax_UTL"),
                            "mm",
                            Visibility::Observable,
                            tolerance_node(type_node, &w.utl, w.sigma),
                        );
                        let good = asm.add(
                            format!("{t}_SMax_MpGood"),
                            Domain::Boolean,
                            Visibility::Observable,
                            Mechanism::ToleranceCheck { monitored: s_max, ltl, utl },
                        );
                        machine_mp_goods.push(good);
                    }
                }

                // Chamber-level force limit and leakage chain.
                let c = format!("PF_M{g}_C{chamber}");
                let f_max_chamber = asm.continuous(
                    format!("{c}_FMaxChamber"),
                    "N",
                    vis(config.visibility.f_max_chamber_observable),
                    Mechanism::PhysicsFormula {
                        formula: FormulaId::ChamberMaxForce,
                        args: bore_f_max.clone(),
                        noise: None,
                    },
                );
                let d_force_relu = asm.continuous(
                    format!("{c}_DeltaForceReLU"),
                    "N",
                    Visibility::Latent,
                    Mechanism::PhysicsFormula {
                        formula: FormulaId::DeltaForceRelu { f_lim: m.f_lim },
                        args: vec![f_max_chamber],
                        noise: None,
                    },
                );
                let leak_tol = asm.continuous(
                    format!("{c}_LeakTolMachine"),
                    "mm",
                    Visibility::Latent,
                    Mechanism::PhysicsFormula {
                        formula: FormulaId::LeakTolMachine {
                            leak_tol_0: m.leak_tol_0,
                            leak_tol_ref: m.leak_tol_ref,
                            d_force_ref: m.d_force_ref,
                        },
                        args: vec![d_force_relu],
                        noise: None,
                    },
                );

                let mut bore_leaks: Vec<NodeId> = Vec::new();
                for (i, &(dd_max, dd_min)) in bore_dd.iter().enumerate() {
                    let t = format!("PF_M{g}_T{}", bore_tool[i]);
                    let a_pf = asm.continuous(
                        format!("{t}_A_LeakPF"),
                        "mm2",
                        Visibility::Latent,
                        Mechanism::PhysicsFormula {
                            formula: FormulaId::LeakAreaPf { beta_asym: m.beta_asym },
                            args: vec![dd_max, dd_min, leak_tol],
                            noise: None,
                        },
                    );
                    let a_bore = asm.continuous(
                        format!("{t}_A_LeakBore"),
                        "mm2",
                        Visibility::Latent,
                        Mechanism::Sum { parents: vec![bore_mv_leak[i], a_pf] },
                    );
                    bore_leaks.push(a_bore);
                }

                let leak_total = asm.continuous(
                    format!("{c}_LeakTotal"),
                    "mm2",
                    Visibility::Latent,
                    Mechanism::Sum { parents: bore_leaks },
                );
                if config.monitors.leak {
                    let ltl = asm.continuous(
                        format!("{c}_Leak_LTL"),
                        "mm2",
                        vis(config.visibility.leak_ltl_observable),
                        Mechanism::ExogenousNoise {
                            distribution: Distribution::PointMass { value: Value::Real(0.0) },
                        },
                    );
                    let utl = asm.continuous(
                        format!("{c}_Leak_UTL"),
                        "mm2",
                        Visibility::Observable,
                        tolerance_node(
                            type_node,
                            &config.tolerances.leak_utl,
                            config.tolerances.leak_sigma,
                        ),
                    );
                    let good = asm.add(
                        format!("{c}_Leak_MpGood"),
                        Domain::Boolean,
                        Visibility::Observable,
                        Mechanism::ToleranceCheck { monitored: leak_total, ltl, utl },
                    );
                    machine_mp_goods.push(good);
                }
            }

            asm.add(
                format!("Sec_{section}_Machine{}_ProcessResult", local_machine + 1),
                Domain::Boolean,
                Visibility::Observable,
                Mechanism::LogicalAnd { parents: machine_mp_goods },
            );

            for channel in &config.context.machine_observable {
                asm.continuous(
                    format!("PF_M{g}_{}", channel.suffix),
                    "",
                    Visibility::Observable,
                    Mechanism::ExogenousNoise { distribution: channel.distribution.clone() },
                );
            }
            for channel in &config.context.machine_latent {
                asm.continuous(
                    format!("PF_M{g}_{}", channel.suffix),
                    "",
                    Visibility::Latent,
                    Mechanism::ExogenousNoise { distribution: channel.distribution.clone() },
                );
            }
        }
    }

    for channel in &config.context.line_observable {
        asm.continuous(
            format!("Line_{}", channel.suffix),
            "",
            Visibility::Observable,
            Mechanism::ExogenousNoise { distribution: channel.distribution.clone() },
        );
    }
    for channel in &config.context.line_latent {
        asm.continuous(
            format!("Line_{}", channel.suffix),
            "",
            Visibility::Latent,
            Mechanism::ExogenousNoise { distribution: channel.distribution.clone() },
        );
    }

    let mut graph = ScmGraph::new(&config.name, &config.version, asm.nodes);
    graph.parameter_nodes = asm.parameter_nodes;
    let report = crate::scm::validate_graph(&graph);
    if !report.is_ok() {
        return Err(BuildError::Validation(report.to_string()));
    }
    Ok(graph)
}

fn gaussian(mu: f64, sigma: f64) -> Distribution {
    Distribution::Gaussian { mu, sigma }
}

fn uniform(lo: f64, hi: f64) -> Distribution {
    Distribution::Uniform { lo, hi }
}

fn half_normal(sigma: f64) -> Distribution {
    Distribution::HalfNormal { sigma }
}

fn truncated(mu: f64, sigma: f64, lower: f64) -> Distribution {
    Distribution::TruncatedGaussian { mu, sigma, lower }
}

fn channels(specs: &[(&str, Distribution)]) -> Vec<ContextChannel> {
    specs
        .iter()
        .map(|(suffix, d)| ContextChannel {
            suffix: suffix.to_string(),
            distribution: d.clone(),
        })
        .collect()
}

fn shared_params(two_parent: bool) -> ParamTables {
    let cond = if two_parent { Conditioning::SupplierAndType } else { Conditioning::Type };
    ParamTables {
        e_mv: ParamSpec {
            conditioning: Conditioning::SupplierAndType,
            base_mu: 110_000.0,
            sigma: 400.0,
            supplier_delta: vec![0.0, 2_500.0],
            type_delta: vec![0.0, 1_000.0, -1_000.0],
            supplier_sigma_scale: vec![1.0, 1.15],
            type_sigma_scale: vec![],
            truncation: Some(1_000.0),
        },
        d_mv_max: ParamSpec {
            conditioning: cond,
            base_mu: 8.020,
            sigma: 3e-4,
            supplier_delta: vec![0.0, 5e-4],
            type_delta: vec![0.0, 2e-3, -2e-3],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(0.1),
        },
        d_mv_min: ParamSpec {
            conditioning: cond,
            base_mu: 8.016,
            sigma: 3e-4,
            supplier_delta: vec![0.0, 5e-4],
            type_delta: vec![0.0, 2e-3, -2e-3],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(0.1),
        },
        l_mv_pf: ParamSpec {
            conditioning: cond,
            base_mu: 5.008,
            sigma: 4e-3,
            supplier_delta: vec![0.0, 2e-3],
            type_delta: vec![0.0, -0.076, 0.147],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(0.5),
        },
        a_leak_raw: ParamSpec {
            conditioning: if two_parent {
                Conditioning::SupplierAndType
            } else {
                Conditioning::Supplier
            },
            base_mu: -0.45,
            sigma: 0.05,
            supplier_delta: vec![0.0, 0.30],
            type_delta: vec![0.0, -0.01, 0.01],
            supplier_sigma_scale: vec![1.0, 1.2],
            type_sigma_scale: vec![],
            truncation: None,
        },
        e_hu: ParamSpec {
            conditioning: Conditioning::SupplierAndType,
            base_mu: 72_000.0,
            sigma: 300.0,
            supplier_delta: vec![0.0, 1_500.0],
            type_delta: vec![0.0, 800.0, -800.0],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(1_000.0),
        },
        e_bore_dev: truncated(2_000.0, 150.0, 0.0),
        d_bore_max: ParamSpec {
            conditioning: cond,
            base_mu: 8.001,
            sigma: 3e-4,
            supplier_delta: vec![0.0, 4e-4],
            type_delta: vec![0.0, 1e-3, -1e-3],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(0.1),
        },
        d_bore_min: ParamSpec {
            conditioning: cond,
            base_mu: 7.997,
            sigma: 3e-4,
            supplier_delta: vec![0.0, 4e-4],
            type_delta: vec![0.0, 1e-3, -1e-3],
            supplier_sigma_scale: vec![],
            type_sigma_scale: vec![],
            truncation: Some(0.1),
        },
    }
}

fn shared_machine() -> MachineParams {
    MachineParams {
        k_stiff_machine: 20_000.0,
        k_stiff_pf_ref: 3_300.0,
        k_stiff_pf_dd_ref: 0.021,
        k_stiff_pf_e_ref: 44_000.0,
        beta_asym: 0.7,
        leak_tol_0: 0.0255,
        leak_tol_ref: 0.01,
        d_force_ref: 1_000.0,
        f_lim: 19_000.0,
        s0: 2.0,
    }
}

fn shared_tolerances() -> ToleranceWindows {
    ToleranceWindows {
        force: Window {
            ltl: vec![15_000.0, 14_950.0, 15_050.0],
            utl: vec![18_500.0, 18_450.0, 18_550.0],
            sigma: 0.5,
        },
        s_max: Window {
            ltl: vec![7.35, 7.30, 7.45],
            utl: vec![8.15, 8.10, 8.25],
            sigma: 1e-3,
        },
        leak_utl: vec![2e-3, 2e-3, 2e-3],
        leak_sigma: 1e-6,
    }
}

fn small_config() -> LineConfig {
    LineConfig {
        name: "causalman_small".into(),
        version: "1.0.0".into(),
        sections: 1,
        machines_per_section: 2,
        chambers_per_machine: 1,
        bores_per_chamber: 1,
        mv_suppliers: vec!["S1".into(), "S2".into()],
        mv_supplier_probs: vec![0.5, 0.5],
        hu_suppliers: vec!["H1".into(), "H2".into()],
        hu_supplier_probs: vec![0.5, 0.5],
        product_types: vec!["911".into(), "921".into(), "931".into()],
        product_type_probs: vec![0.4, 0.35, 0.25],
        params: shared_params(false),
        tolerances: shared_tolerances(),
        machine: shared_machine(),
        trigger_sigma: 120.0,
        monitors: MonitorPolicy { force: true, s_max: true, leak: true },
        visibility: VisibilityPolicy {
            s_grad_observable: true,
            f_max_chamber_observable: true,
            leak_ltl_observable: true,
        },
        context: ContextProfile {
            machine_observable: channels(&[
                ("CycleTime_s", gaussian(14.2, 0.35)),
                ("EnergyPerCycle_kJ", gaussian(11.8, 0.6)),
                ("PeakCurrent_A", gaussian(42.0, 1.4)),
                ("OilPressure_bar", gaussian(182.0, 2.5)),
                ("CoolantFlow_lpm", uniform(11.0, 13.5)),
                ("StationTemp_C", gaussian(33.0, 1.1)),
                ("RoomHumidity_pct", uniform(31.0, 52.0)),
                ("ToolChangeAge_cycles", uniform(0.0, 40_000.0)),
            ]),
            machine_latent: channels(&[
                ("ServoLag_ms", half_normal(0.8)),
                ("ValveResponse_ms", gaussian(6.1, 0.3)),
                ("PumpWear_idx", uniform(0.0, 0.3)),
                ("RailPressureRipple_bar", half_normal(1.2)),
                ("FrameStrain_ppm", gaussian(58.0, 4.0)),
                ("FoundationVibration_mms", half_normal(0.15)),
                ("BearingTemp_C", gaussian(46.0, 1.8)),
                ("MotorTorqueRipple_pct", half_normal(0.9)),
                ("SealDegradation_idx", uniform(0.0, 0.2)),
                ("ControlLoopJitter_ms", half_normal(0.25)),
                ("SensorNoiseFloor_N", truncated(2.4, 0.3, 0.5)),
                ("ADCOffsetDrift_mV", gaussian(0.0, 0.7)),
                ("ThermalExpansion_um", gaussian(12.0, 1.5)),
                ("GuideFriction_N", truncated(54.0, 5.0, 10.0)),
                ("LubricantViscosity_cSt", gaussian(46.0, 2.2)),
                ("AirPressure_bar", gaussian(6.2, 0.12)),
                ("ChillerLoad_pct", uniform(20.0, 80.0)),
                ("PowerFactor_pct", gaussian(92.0, 1.6)),
                ("GridFlicker_pct", half_normal(0.4)),
                ("ClampSlack_um", half_normal(3.0)),
                ("DieAlignment_um", gaussian(0.0, 2.4)),
                ("PressHeadTilt_mrad", gaussian(0.0, 0.5)),
                ("CrossbeamTemp_C", gaussian(39.0, 1.2)),
                ("OilParticleCount_ppm", truncated(140.0, 25.0, 0.0)),
                ("AccumulatorPrecharge_bar", gaussian(92.0, 2.0)),
                ("SafetyCurtainLatency_ms", half_normal(1.1)),
            ]),
            line_observable: channels(&[
                ("HallTemp_C", gaussian(24.5, 1.3)),
                ("TaktTime_s", gaussian(30.0, 0.8)),
                ("SupplyVoltage_V", gaussian(398.0, 3.0)),
            ]),
            line_latent: channels(&[
                ("PowerQuality_idx", uniform(0.9, 1.0)),
                ("CompressedAirDew_C", gaussian(-32.0, 2.0)),
                ("GroundVibration_mms", half_normal(0.08)),
            ]),
        },
    }
}

fn medium_config() -> LineConfig {
    LineConfig {
        name: "causalman_medium".into(),
        version: "1.0.0".into(),
        sections: 2,
        machines_per_section: 2,
        chambers_per_machine: 2,
        bores_per_chamber: 2,
        mv_suppliers: vec!["S1".into(), "S2".into()],
        mv_supplier_probs: vec![0.5, 0.5],
        hu_suppliers: vec!["H1".into(), "H2".into()],
        hu_supplier_probs: vec![0.5, 0.5],
        product_types: vec!["911".into(), "921".into(), "931".into()],
        product_type_probs: vec![0.4, 0.35, 0.25],
        params: shared_params(true),
        tolerances: shared_tolerances(),
        machine: shared_machine(),
        trigger_sigma: 120.0,
        monitors: MonitorPolicy { force: true, s_max: true, leak: true },
        visibility: VisibilityPolicy {
            s_grad_observable: false,
            f_max_chamber_observable: false,
            leak_ltl_observable: false,
        },
        context: ContextProfile {
            machine_observable: Vec::new(),
            machine_latent: channels(&[
                ("ServoLag_ms", half_normal(0.8)),
                ("PumpWear_idx", uniform(0.0, 0.3)),
                ("BearingTemp_C", gaussian(46.0, 1.8)),
                ("SealDegradation_idx", uniform(0.0, 0.2)),
                ("LubricantViscosity_cSt", gaussian(46.0, 2.2)),
                ("GuideFriction_N", truncated(54.0, 5.0, 10.0)),
            ]),
            line_observable: channels(&[
                ("HallTemp_C", gaussian(24.5, 1.3)),
                ("TaktTime_s", gaussian(30.0, 0.8)),
                ("SupplyVoltage_V", gaussian(398.0, 3.0)),
            ]),
            line_latent: channels(&[("PowerQuality_idx", uniform(0.9, 1.0))]),
        },
    }
}

/// Shipped line configurations.
pub fn preset(name: &str) -> Result<LineConfig, BuildError> {
    match name {
        "small" => Ok(small_config()),
        "medium" => Ok(medium_config()),
        other => Err(BuildError::UnknownPreset(other.to_string())),
    }
}
