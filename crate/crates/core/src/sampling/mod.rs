//! Batch-wise ancestral sampling with deterministic counter-based noise.
//!
//! A batch fixes one parametrization of the model (product type, suppliers),
//! optionally applies interventions, and then draws rows by evaluating nodes
//! in topological order. Every draw is addressed by
//! `(master_seed, batch_id, row, node)`, so output is a pure function of
//! `(graph, schedule, master_seed)` regardless of thread count.

mod engine;

pub use engine::{sample_batch, sample_schedule, SampleOptions};

use crate::scm::{Intervention, NodeId, ScmError};
use crate::value::{Domain, Value};
use crate::Visibility;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("graph failed validation after surgery: {0}")]
    InvalidGraph(String),
    #[error("node `{0}` is not a designated parameter node")]
    NotAParameterNode(String),
    #[error("parametrization value {value} is outside the domain of `{node}`")]
    BadParametrization { node: String, value: String },
    #[error("duplicate batch id {0}")]
    DuplicateBatchId(u64),
    #[error("batch must draw at least one sample")]
    EmptyBatch,
    #[error("mechanism of `{node}` failed: {detail}")]
    Mechanism { node: String, detail: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("continuous column `{0}` needs a bin count")]
    BinsRequired(String),
}

/// One batch: a parametrization of the model, a sample count and optional
/// interventions (empty list = observational batch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub batch_id: u64,
    pub n_samples: u64,
    /// Pinned values for designated parameter nodes. Unpinned parameter
    /// nodes are drawn once per batch from their own distribution.
    #[serde(default)]
    pub parametrization: Vec<(NodeId, Value)>,
    #[serde(default)]
    pub interventions: Vec<Intervention>,
}

impl BatchConfig {
    pub fn observational(batch_id: u64, n_samples: u64) -> Self {
        BatchConfig { batch_id, n_samples, parametrization: Vec::new(), interventions: Vec::new() }
    }
}

/// Column metadata carried with every dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub domain: Domain,
    pub visibility: Visibility,
}

/// Column storage, typed per domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Real(Vec<f64>),
    Bool(Vec<bool>),
    Int(Vec<i64>),
    Cat(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Real(v) => v.len(),
            Column::Bool(v) => v.len(),
            Column::Int(v) => v.len(),
            Column::Cat(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            Column::Real(v) => Value::Real(v[row]),
            Column::Bool(v) => Value::Bool(v[row]),
            Column::Int(v) => Value::Int(v[row]),
            Column::Cat(v) => Value::Cat(v[row]),
        }
    }

    pub fn with_capacity(domain: &Domain, n: usize) -> Column {
        match domain {
            Domain::Continuous { .. } => Column::Real(Vec::with_capacity(n)),
            Domain::Boolean => Column::Bool(Vec::with_capacity(n)),
            Domain::Discrete { .. } => Column::Int(Vec::with_capacity(n)),
            Domain::Categorical { .. } => Column::Cat(Vec::with_capacity(n)),
        }
    }

    pub fn push(&mut self, value: Value) {
        match (self, value) {
            (Column::Real(v), Value::Real(x)) => v.push(x),
            (Column::Bool(v), Value::Bool(x)) => v.push(x),
            (Column::Int(v), Value::Int(x)) => v.push(x),
            (Column::Cat(v), Value::Cat(x)) => v.push(x),
            _ => panic!("column/value type mismatch"),
        }
    }

    fn append(&mut self, other: &Column) {
        match (self, other) {
            (Column::Real(a), Column::Real(b)) => a.extend_from_slice(b),
            (Column::Bool(a), Column::Bool(b)) => a.extend_from_slice(b),
            (Column::Int(a), Column::Int(b)) => a.extend_from_slice(b),
            (Column::Cat(a), Column::Cat(b)) => a.extend_from_slice(b),
            _ => panic!("column type mismatch on append"),
        }
    }
}

/// Provenance of one sampled batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub batch_id: u64,
    pub n_samples: u64,
    pub parametrization: Vec<(NodeId, Value)>,
    pub interventions: Vec<Intervention>,
}

/// Column-typed sample table with per-row batch ids and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<ColumnSpec>,
    pub data: Vec<Column>,
    pub batch_ids: Vec<u64>,
    /// Master seed the dataset was drawn with.
    pub seed: u64,
    /// Content hash of the generating graph.
    pub graph_fingerprint: String,
    pub batches: Vec<BatchMeta>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.batch_ids.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize, SampleError> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| SampleError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column, SampleError> {
        Ok(&self.data[self.column_index(name)?])
    }

    /// Column as its numeric embedding (reals as-is, booleans 1/0, category
    /// indices as integers).
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>, SampleError> {
        let col = self.column(name)?;
        Ok((0..col.len()).map(|r| col.value(r).to_f64()).collect())
    }

    pub(crate) fn concat(mut parts: Vec<Dataset>) -> Dataset {
        let mut first = parts.remove(0);
        for part in parts {
            for (dst, src) in first.data.iter_mut().zip(&part.data) {
                dst.append(src);
            }
            first.batch_ids.extend_from_slice(&part.batch_ids);
            first.batches.extend(part.batches);
        }
        first
    }
}

/// Drop all latent columns; rows and provenance are preserved.
pub fn observe(dataset: &Dataset) -> Dataset {
    let keep: Vec<usize> = dataset
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.visibility == Visibility::Observable)
        .map(|(i, _)| i)
        .collect();
    Dataset {
        columns: keep.iter().map(|&i| dataset.columns[i].clone()).collect(),
        data: keep.iter().map(|&i| dataset.data[i].clone()).collect(),
        batch_ids: dataset.batch_ids.clone(),
        seed: dataset.seed,
        graph_fingerprint: dataset.graph_fingerprint.clone(),
        batches: dataset.batches.clone(),
    }
}

/// Normalized histogram of one column.
///
/// Booleans use two cells ordered (false, true); categoricals and discrete
/// columns use one cell per category. Continuous columns require `bins` and
/// use equal-width right-closed bins over the observed min/max; the minimum
/// falls into bin 0. A constant continuous column puts all mass in bin 0.
pub fn empirical_distribution(
    dataset: &Dataset,
    column: &str,
    bins: Option<usize>,
) -> Result<Vec<f64>, SampleError> {
    let idx = dataset.column_index(column)?;
    let n = dataset.n_rows();
    if n == 0 {
        return Err(SampleError::EmptyDataset);
    }
    let spec = &dataset.columns[idx];
    let col = &dataset.data[idx];

    let counts = match (col, &spec.domain) {
        (Column::Bool(v), _) => {
            let mut c = vec![0u64; 2];
            for &b in v {
                c[usize::from(b)] += 1;
            }
            c
        }
        (Column::Cat(v), Domain::Categorical { labels }) => {
            let mut c = vec![0u64; labels.len()];
            for &i in v {
                c[i as usize] += 1;
            }
            c
        }
        (Column::Int(v), Domain::Discrete { cardinality }) => {
            let mut c = vec![0u64; *cardinality as usize];
            for &i in v {
                c[i as usize] += 1;
            }
            c
        }
        (Column::Real(v), _) => {
            let k = bins.ok_or_else(|| SampleError::BinsRequired(column.to_string()))?.max(1);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &x in v {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            let width = (hi - lo) / k as f64;
            let mut c = vec![0u64; k];
            for &x in v {
                let bin = if width == 0.0 {
                    0
                } else {
                    // Right-closed bins: the cell (lo + i*w, lo + (i+1)*w]
                    // with the minimum assigned to bin 0.
                    (((x - lo) / width).ceil() as i64 - 1).clamp(0, k as i64 - 1) as usize
                };
                c[bin] += 1;
            }
            c
        }
        _ => unreachable!("column storage always matches its domain"),
    };

    Ok(counts.iter().map(|&c| c as f64 / n as f64).collect())
}
