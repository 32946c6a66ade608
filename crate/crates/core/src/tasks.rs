//! Benchmark task definitions, Monte-Carlo ground-truth oracles over the
//! simulator, and dataset preprocessing utilities.

use crate::rng::NoiseStream;
use crate::sampling::{sample_schedule, BatchConfig, SampleError, SampleOptions};
use crate::scm::{Intervention, ScmGraph};
use crate::value::Value;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("value `{value}` does not lie in the domain of `{node}`")]
    BadValue { node: String, value: String },
    #[error("conditioning node `{0}` is not a designated parameter node")]
    BadConditioning(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("n_per_arm must be positive")]
    EmptyArm,
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("quantization needs at least 2 bins")]
    TooFewBins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskId {
    T1,
    T2,
    T3,
    T4,
    Additional,
}

impl TaskId {
    pub const ALL: [TaskId; 5] =
        [TaskId::T1, TaskId::T2, TaskId::T3, TaskId::T4, TaskId::Additional];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskId::T1 => "T1",
            TaskId::T2 => "T2",
            TaskId::T3 => "T3",
            TaskId::T4 => "T4",
            TaskId::Additional => "ADDITIONAL",
        }
    }

    pub fn parse(s: &str) -> Option<TaskId> {
        match s {
            "T1" => Some(TaskId::T1),
            "T2" => Some(TaskId::T2),
            "T3" => Some(TaskId::T3),
            "T4" => Some(TaskId::T4),
            "ADDITIONAL" => Some(TaskId::Additional),
            _ => None,
        }
    }
}

/// Atomic intervention addressed by node name; tasks reference the line's
/// published variable names and are resolved against a graph at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedIntervention {
    pub node: String,
    pub value: Value,
}

impl NamedIntervention {
    fn resolve(&self, graph: &ScmGraph) -> Result<Intervention, TaskError> {
        let node = graph
            .node_by_name(&self.node)
            .map_err(|_| TaskError::UnknownNode(self.node.clone()))?;
        if !node.domain.contains(&self.value) {
            return Err(TaskError::BadValue {
                node: self.node.clone(),
                value: self.value.to_string(),
            });
        }
        Ok(Intervention::hard(node.id, self.value))
    }
}

/// One benchmark query: treatment/control interventions on an outcome,
/// optionally conditioned on a categorical covariate (CATE tasks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: TaskId,
    pub outcome: String,
    pub treatment: NamedIntervention,
    pub control: NamedIntervention,
    /// (node name, value token); present exactly for T3/T4.
    pub conditioning: Option<(String, String)>,
}

const OUTCOME: &str = "Sec_C2_Machine1_ProcessResult";
const CONDITIONING_NODE: &str = "HU_HU_Block_Type_ID_num";
const CONDITIONING_VALUE: &str = "921";

/// The built-in benchmark tasks over the line presets.
pub fn builtin_task(id: TaskId) -> TaskSpec {
    let force_ltl = |value: f64| NamedIntervention {
        node: "PF_M1_T1_Force_LTL".into(),
        value: Value::Real(value),
    };
    let force = |value: f64| NamedIntervention {
        node: "PF_M1_T1_Force".into(),
        value: Value::Real(value),
    };
    let conditioning = Some((CONDITIONING_NODE.to_string(), CONDITIONING_VALUE.to_string()));
    match id {
        TaskId::T1 => TaskSpec {
            task_id: id,
            outcome: OUTCOME.into(),
            treatment: force_ltl(18_000.0),
            control: force_ltl(15_000.0),
            conditioning: None,
        },
        TaskId::T2 => TaskSpec {
            task_id: id,
            outcome: OUTCOME.into(),
            treatment: force(30_000.0),
            control: force(16_000.0),
            conditioning: None,
        },
        TaskId::T3 => TaskSpec { conditioning, ..builtin_task(TaskId::T1) },
        TaskId::T4 => TaskSpec {
            conditioning: Some((CONDITIONING_NODE.to_string(), CONDITIONING_VALUE.to_string())),
            ..builtin_task(TaskId::T2)
        },
        TaskId::Additional => TaskSpec {
            task_id: id,
            outcome: OUTCOME.into(),
            treatment: NamedIntervention {
                node: "PF_M1_T1_Force_MpGood".into(),
                value: Value::Bool(false),
            },
            control: NamedIntervention {
                node: "PF_M1_T1_Force_MpGood".into(),
                value: Value::Bool(true),
            },
            conditioning: None,
        },
    }
}

/// Monte-Carlo estimate of a task's effect with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    /// ATE (or CATE for conditioned tasks): treated mean minus control mean.
    pub effect: f64,
    /// Standard error of the mean difference.
    pub se: f64,
    pub treated_mean: f64,
    pub control_mean: f64,
    pub n_per_arm: u64,
}

/// Rows per interventional batch in the ground-truth schedules. Parameter
/// draws (product type, suppliers) vary across batches, so arms marginalize
/// over the parametrization prior.
const GROUND_TRUTH_BATCH_ROWS: u64 = 100;

fn arm_schedule(n: u64, intervention: Intervention, pin: &[(crate::scm::NodeId, Value)]) -> Vec<BatchConfig> {
    let mut batches = Vec::new();
    let mut remaining = n;
    let mut id = 0u64;
    while remaining > 0 {
        let rows = remaining.min(GROUND_TRUTH_BATCH_ROWS);
        batches.push(BatchConfig {
            batch_id: id,
            n_samples: rows,
            parametrization: pin.to_vec(),
            interventions: vec![intervention.clone()],
        });
        remaining -= rows;
        id += 1;
    }
    batches
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Sample interventional batches per arm and return the effect of the task's
/// outcome (boolean outcomes encoded 1/0).
///
/// Conditioning (T3/T4) pins the conditioning node in both arms' batch
/// parametrization. The conditioning variable is an exogenous root, so
/// conditioning on it coincides with intervening on it for every downstream
/// quantity; pinning avoids empty strata under batch-level parameter draws.
pub fn ground_truth_effect(
    graph: &ScmGraph,
    task: &TaskSpec,
    n_per_arm: u64,
    seed: u64,
    options: SampleOptions,
) -> Result<EffectEstimate, TaskError> {
    if n_per_arm == 0 {
        return Err(TaskError::EmptyArm);
    }
    graph
        .node_by_name(&task.outcome)
        .map_err(|_| TaskError::UnknownNode(task.outcome.clone()))?;
    let treatment = task.treatment.resolve(graph)?;
    let control = task.control.resolve(graph)?;

    let pin: Vec<(crate::scm::NodeId, Value)> = match &task.conditioning {
        None => Vec::new(),
        Some((name, token)) => {
            let node = graph
                .node_by_name(name)
                .map_err(|_| TaskError::UnknownNode(name.clone()))?;
            let value = node.domain.parse_value(token).ok_or_else(|| TaskError::BadValue {
                node: name.clone(),
                value: token.clone(),
            })?;
            if !graph.parameter_nodes.contains(&node.id) {
                return Err(TaskError::BadConditioning(name.clone()));
            }
            vec![(node.id, value)]
        }
    };

    let treated_seed = NoiseStream::tagged(seed, 0x7452_4541_5445_44).next_u64();
    let control_seed = NoiseStream::tagged(seed, 0x434f_4e54_524f_4c).next_u64();

    let arm = |seed: u64, intervention: Intervention| -> Result<(f64, f64), TaskError> {
        let schedule = arm_schedule(n_per_arm, intervention, &pin);
        let data = sample_schedule(graph, &schedule, seed, options)?;
        let outcome = data.column_f64(&task.outcome)?;
        Ok(mean_and_var(&outcome))
    };
    let (treated_mean, var_t) = arm(treated_seed, treatment)?;
    let (control_mean, var_c) = arm(control_seed, control)?;

    let n = n_per_arm as f64;
    Ok(EffectEstimate {
        effect: treated_mean - control_mean,
        se: (var_t / n + var_c / n).sqrt(),
        treated_mean,
        control_mean,
        n_per_arm,
    })
}

/// Ordinal encoding: labels sorted lexicographically map to 0..k-1.
/// Returns the encoded column and the label map (index = code).
pub fn ordinal_encode(column: &[String]) -> (Vec<i64>, Vec<String>) {
    let mut labels: Vec<String> = column.to_vec();
    labels.sort();
    labels.dedup();
    let encoded = column
        .iter()
        .map(|v| labels.binary_search(v).expect("label present") as i64)
        .collect();
    (encoded, labels)
}

/// Min-max normalization into [-1, 1]; a constant column maps to all zeros.
pub fn minmax_normalize(column: &[f64]) -> Result<Vec<f64>, TaskError> {
    if column.is_empty() {
        return Err(TaskError::EmptyInput);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in column {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        return Ok(vec![0.0; column.len()]);
    }
    Ok(column.iter().map(|&x| 2.0 * (x - lo) / (hi - lo) - 1.0).collect())
}

/// Uniform quantization: k equal-width left-closed bins over [min, max];
/// the maximum maps to k-1. A constant column maps to all zeros.
pub fn uniform_quantize(column: &[f64], k: usize) -> Result<Vec<i64>, TaskError> {
    if k < 2 {
        return Err(TaskError::TooFewBins);
    }
    if column.is_empty() {
        return Err(TaskError::EmptyInput);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in column {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        return Ok(vec![0; column.len()]);
    }
    let width = (hi - lo) / k as f64;
    Ok(column
        .iter()
        .map(|&x| (((x - lo) / width).floor() as i64).clamp(0, k as i64 - 1))
        .collect())
}
