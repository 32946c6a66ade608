//! Composition check: a hand-wired single-bore graph evaluated by the
//! sampling engine must reproduce the pure physics functions called in
//! sequence on the same inputs.

use causalman::physics;
use causalman::sampling::{sample_batch, BatchConfig, SampleOptions};
use causalman::{
    Distribution, Domain, FormulaId, Mechanism, NodeId, NodeSpec, ScmGraph, Value, Visibility,
};

struct Inputs {
    e_bore: f64,
    e_mv: f64,
    d_mv_max: f64,
    d_mv_min: f64,
    d_bore_max: f64,
    d_bore_min: f64,
    l_mv: f64,
    a_raw: f64,
    trigger: f64,
}

struct Consts {
    k_ref: f64,
    dd_ref: f64,
    e_ref: f64,
    k_machine: f64,
    beta: f64,
    s0: f64,
    f_lim: f64,
    leak_tol_0: f64,
    leak_tol_ref: f64,
    d_force_ref: f64,
    ltl: f64,
    utl: f64,
}

fn wire(inputs: &Inputs, c: &Consts) -> ScmGraph {
    let cont = || Domain::continuous("");
    let fixed = |id: u32, name: &str, value: f64| NodeSpec {
        id: NodeId(id),
        name: name.into(),
        domain: cont(),
        visibility: Visibility::Observable,
        mechanism: Mechanism::ExogenousNoise {
            distribution: Distribution::PointMass { value: Value::Real(value) },
        },
    };
    let formula = |id: u32, name: &str, f: FormulaId, args: Vec<u32>| NodeSpec {
        id: NodeId(id),
        name: name.into(),
        domain: cont(),
        visibility: Visibility::Observable,
        mechanism: Mechanism::PhysicsFormula {
            formula: f,
            args: args.into_iter().map(NodeId).collect(),
            noise: None,
        },
    };

    let nodes = vec![
        fixed(0, "EBore", inputs.e_bore),
        fixed(1, "EMv", inputs.e_mv),
        fixed(2, "DMvMax", inputs.d_mv_max),
        fixed(3, "DMvMin", inputs.d_mv_min),
        fixed(4, "DBoreMax", inputs.d_bore_max),
        fixed(5, "DBoreMin", inputs.d_bore_min),
        fixed(6, "AxialLen", inputs.l_mv),
        fixed(7, "ARaw", inputs.a_raw),
        fixed(8, "Trigger", inputs.trigger),
        formula(9, "DdMax", FormulaId::DeltaDMax, vec![2, 5]),
        formula(10, "DdMin", FormulaId::DeltaDMin, vec![3, 4]),
        NodeSpec {
            id: NodeId(11),
            name: "DdMean".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::AffineMix { beta: c.beta, hi: NodeId(9), lo: NodeId(10) },
        },
        formula(12, "EEff", FormulaId::EffectiveElasticity, vec![0, 1]),
        formula(
            13,
            "KPf",
            FormulaId::PfStiffness { k_ref: c.k_ref, dd_ref: c.dd_ref, e_ref: c.e_ref },
            vec![11, 12],
        ),
        formula(14, "KTotal", FormulaId::TotalStiffness { k_machine: c.k_machine }, vec![13]),
        formula(15, "Force", FormulaId::PressingForce, vec![6, 13]),
        formula(16, "DsGrad", FormulaId::DeltaSGrad, vec![15, 14]),
        formula(17, "SGrad", FormulaId::SGrad { s0: c.s0 }, vec![16]),
        NodeSpec {
            id: NodeId(18),
            name: "FMax".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Sum { parents: vec![NodeId(15), NodeId(8)] },
        },
        formula(19, "DsMax", FormulaId::DeltaSMax { k_machine: c.k_machine }, vec![8]),
        NodeSpec {
            id: NodeId(20),
            name: "SMax".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Sum { parents: vec![NodeId(17), NodeId(19)] },
        },
        formula(21, "FMaxChamber", FormulaId::ChamberMaxForce, vec![18]),
        formula(22, "DForceRelu", FormulaId::DeltaForceRelu { f_lim: c.f_lim }, vec![21]),
        formula(
            23,
            "LeakTol",
            FormulaId::LeakTolMachine {
                leak_tol_0: c.leak_tol_0,
                leak_tol_ref: c.leak_tol_ref,
                d_force_ref: c.d_force_ref,
            },
            vec![22],
        ),
        formula(24, "ALeakPf", FormulaId::LeakAreaPf { beta_asym: c.beta }, vec![9, 10, 23]),
        NodeSpec {
            id: NodeId(25),
            name: "ALeakMv".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Relu { parent: NodeId(7) },
        },
        NodeSpec {
            id: NodeId(26),
            name: "ALeakBore".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Sum { parents: vec![NodeId(25), NodeId(24)] },
        },
        NodeSpec {
            id: NodeId(27),
            name: "ALeakTotal".into(),
            domain: cont(),
            visibility: Visibility::Observable,
            mechanism: Mechanism::Sum { parents: vec![NodeId(26)] },
        },
        fixed(28, "ForceLtl", c.ltl),
        fixed(29, "ForceUtl", c.utl),
        NodeSpec {
            id: NodeId(30),
            name: "ForceGood".into(),
            domain: Domain::Boolean,
            visibility: Visibility::Observable,
            mechanism: Mechanism::ToleranceCheck {
                monitored: NodeId(15),
                ltl: NodeId(28),
                utl: NodeId(29),
            },
        },
        NodeSpec {
            id: NodeId(31),
            name: "ProcessResult".into(),
            domain: Domain::Boolean,
            visibility: Visibility::Observable,
            mechanism: Mechanism::LogicalAnd { parents: vec![NodeId(30)] },
        },
    ];
    ScmGraph::new("composition", "1", nodes)
}

#[test]
fn graph_evaluation_equals_pure_function_sequence() {
    let inputs = Inputs {
        e_bore: 74_000.0,
        e_mv: 110_000.0,
        d_mv_max: 8.021,
        d_mv_min: 8.017,
        d_bore_max: 8.002,
        d_bore_min: 7.998,
        l_mv: 5.0,
        a_raw: -0.25,
        trigger: 140.0,
    };
    let c = Consts {
        k_ref: 3_300.0,
        dd_ref: 0.021,
        e_ref: 44_000.0,
        k_machine: 20_000.0,
        beta: 0.7,
        s0: 2.0,
        f_lim: 15_500.0,
        leak_tol_0: 0.0255,
        leak_tol_ref: 0.01,
        d_force_ref: 1_000.0,
        ltl: 15_000.0,
        utl: 18_500.0,
    };

    // Pure-function sequence.
    let (dd_max, dd_min) =
        physics::delta_d(inputs.d_mv_max, inputs.d_bore_min, inputs.d_mv_min, inputs.d_bore_max)
            .unwrap();
    let dd_mean = physics::delta_d_mean(dd_max, dd_min, c.beta).unwrap();
    let e_eff = physics::effective_elasticity(inputs.e_bore, inputs.e_mv).unwrap();
    let k_pf = physics::pf_stiffness(c.k_ref, dd_mean, c.dd_ref, e_eff, c.e_ref).unwrap();
    let k_total = physics::total_stiffness(c.k_machine, k_pf).unwrap();
    let force = physics::pressing_force(inputs.l_mv, k_pf).unwrap();
    let (ds_grad, s_grad) = physics::displacement(force, k_total, c.s0).unwrap();
    let (f_max, ds_max, s_max) =
        physics::max_force_and_displacement(force, inputs.trigger, c.k_machine, s_grad).unwrap();
    let d_force_relu = physics::delta_force_relu(f_max, c.f_lim).unwrap();
    let leak_tol =
        physics::leak_tol_machine(c.leak_tol_0, c.leak_tol_ref, d_force_relu, c.d_force_ref)
            .unwrap();
    let a_leak_pf = physics::leak_area_pf(dd_max, dd_min, leak_tol, c.beta).unwrap();
    let a_leak_mv = physics::a_leak_mv(inputs.a_raw).unwrap();
    let a_leak_bore = physics::a_leak_bore(a_leak_mv, a_leak_pf).unwrap();
    let a_leak_total = physics::a_leak_total(&[a_leak_bore]).unwrap();
    let good = physics::mp_good(force, c.ltl, c.utl).unwrap();
    let result = physics::process_result(&[good]).unwrap();

    // Graph evaluation on the same fixed inputs.
    let graph = wire(&inputs, &c);
    let ds = sample_batch(&graph, &BatchConfig::observational(0, 1), 0, SampleOptions::default())
        .unwrap();
    let real = |name: &str| ds.column_f64(name).unwrap()[0];

    assert_eq!(real("DdMax"), dd_max);
    assert_eq!(real("DdMin"), dd_min);
    assert_eq!(real("DdMean"), dd_mean);
    assert_eq!(real("EEff"), e_eff);
    assert_eq!(real("KPf"), k_pf);
    assert_eq!(real("KTotal"), k_total);
    assert_eq!(real("Force"), force);
    assert_eq!(real("DsGrad"), ds_grad);
    assert_eq!(real("SGrad"), s_grad);
    assert_eq!(real("FMax"), f_max);
    assert_eq!(real("DsMax"), ds_max);
    assert_eq!(real("SMax"), s_max);
    assert_eq!(real("FMaxChamber"), f_max);
    assert_eq!(real("DForceRelu"), d_force_relu);
    assert_eq!(real("LeakTol"), leak_tol);
    assert_eq!(real("ALeakPf"), a_leak_pf);
    assert_eq!(real("ALeakMv"), a_leak_mv);
    assert_eq!(real("ALeakBore"), a_leak_bore);
    assert_eq!(real("ALeakTotal"), a_leak_total);
    assert_eq!(real("ForceGood"), f64::from(u8::from(good)));
    assert_eq!(real("ProcessResult"), f64::from(u8::from(result)));
    // Force exceeded the deliberately low f_lim, so the overshoot chain is
    // exercised with non-zero values.
    assert!(d_force_relu > 0.0);
    assert!(real("ALeakPf") >= 0.0);
}
