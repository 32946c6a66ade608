//! Graph compilation and row evaluation.

use super::{BatchConfig, BatchMeta, Column, ColumnSpec, Dataset, SampleError};
use crate::distribution::Distribution;
use crate::physics;
use crate::rng::{NoiseStream, PARAM_DRAW_ROW};
use crate::scm::{validate_graph, FormulaId, Intervention, Mechanism, ScmGraph};
use crate::value::{Domain, Value};

/// Engine knobs. Thread count never changes output bytes; it only splits row
/// ranges across workers.
#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub threads: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { threads: 1 }
    }
}

impl SampleOptions {
    pub fn with_threads(threads: usize) -> Self {
        SampleOptions { threads: threads.max(1) }
    }
}

/// Mechanism lowered for the hot loop: parent lookups by dense index,
/// conditional tables as mixed-radix arrays.
enum Compiled {
    Noise(Distribution),
    CondGaussian {
        parents: Vec<usize>,
        strides: Vec<u64>,
        entries: Vec<(f64, f64)>,
        truncation: Option<f64>,
    },
    CondCategorical {
        parents: Vec<usize>,
        strides: Vec<u64>,
        entries: Vec<Vec<f64>>,
    },
    Tolerance { monitored: usize, ltl: usize, utl: usize },
    And(Vec<usize>),
    Sum(Vec<usize>),
    Relu(usize),
    Affine { beta: f64, hi: usize, lo: usize },
    Formula { formula: FormulaId, args: Vec<usize>, noise: Option<Distribution> },
}

struct CompiledGraph {
    /// Node evaluation order (topological).
    order: Vec<usize>,
    mechanisms: Vec<Compiled>,
    names: Vec<String>,
    /// Storage kind per node, used to coerce index-valued draws into the
    /// node's domain (Cat -> Int for discrete, Cat -> Bool for boolean).
    domains: Vec<Domain>,
}

fn mixed_radix(graph: &ScmGraph, parents: &[crate::scm::NodeId]) -> (Vec<usize>, Vec<u64>, u64) {
    let cards: Vec<u64> = parents
        .iter()
        .map(|p| u64::from(graph.nodes[p.index()].domain.cardinality().unwrap_or(1)))
        .collect();
    let mut strides = vec![0u64; parents.len()];
    let mut acc = 1u64;
    for i in (0..parents.len()).rev() {
        strides[i] = acc;
        acc *= cards[i];
    }
    (parents.iter().map(|p| p.index()).collect(), strides, acc)
}

fn compile(graph: &ScmGraph) -> Result<CompiledGraph, SampleError> {
    let order: Vec<usize> = graph
        .topological_order()
        .map_err(|e| SampleError::InvalidGraph(e.to_string()))?
        .iter()
        .map(|id| id.index())
        .collect();

    let mut mechanisms = Vec::with_capacity(graph.len());
    for node in &graph.nodes {
        let compiled = match &node.mechanism {
            Mechanism::ExogenousNoise { distribution } => Compiled::Noise(distribution.clone()),
            Mechanism::ConditionalGaussian { parents, table, truncation } => {
                let (parents, strides, total) = mixed_radix(graph, parents);
                let mut entries = vec![(f64::NAN, f64::NAN); total as usize];
                for (key, entry) in &table.entries {
                    let idx: u64 = key
                        .iter()
                        .zip(&strides)
                        .map(|(&k, &s)| u64::from(k) * s)
                        .sum();
                    entries[idx as usize] = (entry.mu, entry.sigma);
                }
                Compiled::CondGaussian { parents, strides, entries, truncation: *truncation }
            }
            Mechanism::ConditionalCategorical { parents, table } => {
                let (parents, strides, total) = mixed_radix(graph, parents);
                let mut entries = vec![Vec::new(); total as usize];
                for (key, probs) in &table.entries {
                    let idx: u64 = key
                        .iter()
                        .zip(&strides)
                        .map(|(&k, &s)| u64::from(k) * s)
                        .sum();
                    entries[idx as usize] = probs.clone();
                }
                Compiled::CondCategorical { parents, strides, entries }
            }
            Mechanism::ToleranceCheck { monitored, ltl, utl } => Compiled::Tolerance {
                monitored: monitored.index(),
                ltl: ltl.index(),
                utl: utl.index(),
            },
            Mechanism::LogicalAnd { parents } => {
                Compiled::And(parents.iter().map(|p| p.index()).collect())
            }
            Mechanism::Sum { parents } => {
                Compiled::Sum(parents.iter().map(|p| p.index()).collect())
            }
            Mechanism::Relu { parent } => Compiled::Relu(parent.index()),
            Mechanism::AffineMix { beta, hi, lo } => {
                Compiled::Affine { beta: *beta, hi: hi.index(), lo: lo.index() }
            }
            Mechanism::PhysicsFormula { formula, args, noise } => Compiled::Formula {
                formula: formula.clone(),
                args: args.iter().map(|a| a.index()).collect(),
                noise: noise.clone(),
            },
        };
        mechanisms.push(compiled);
    }

    Ok(CompiledGraph {
        order,
        mechanisms,
        names: graph.nodes.iter().map(|n| n.name.clone()).collect(),
        domains: graph.nodes.iter().map(|n| n.domain.clone()).collect(),
    })
}

impl CompiledGraph {
    fn eval_node(
        &self,
        node: usize,
        values: &[Value],
        stream: &mut NoiseStream,
    ) -> Result<Value, SampleError> {
        let fail = |detail: String| SampleError::Mechanism {
            node: self.names[node].clone(),
            detail,
        };
        let real = |i: usize| values[i].to_f64();

        let value = match &self.mechanisms[node] {
            Compiled::Noise(d) => d.sample(stream),
            Compiled::CondGaussian { parents, strides, entries, truncation } => {
                let mut idx = 0u64;
                for (p, s) in parents.iter().zip(strides) {
                    let k = values[*p]
                        .as_index()
                        .ok_or_else(|| fail("categorical parent produced a non-index value".into()))?;
                    idx += u64::from(k) * s;
                }
                let (mu, sigma) = entries[idx as usize];
                let x = match truncation {
                    None => mu + sigma * stream.next_standard_normal(),
                    Some(lower) => loop {
                        let x = mu + sigma * stream.next_standard_normal();
                        if x >= *lower {
                            break x;
                        }
                    },
                };
                Value::Real(x)
            }
            Compiled::CondCategorical { parents, strides, entries } => {
                let mut idx = 0u64;
                for (p, s) in parents.iter().zip(strides) {
                    let k = values[*p]
                        .as_index()
                        .ok_or_else(|| fail("categorical parent produced a non-index value".into()))?;
                    idx += u64::from(k) * s;
                }
                let probs = &entries[idx as usize];
                let u = stream.next_f64();
                let mut acc = 0.0;
                let mut chosen = probs.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                Value::Cat(chosen as u32)
            }
            Compiled::Tolerance { monitored, ltl, utl } => {
                let good = physics::mp_good(real(*monitored), real(*ltl), real(*utl))
                    .map_err(|e| fail(e.to_string()))?;
                Value::Bool(good)
            }
            Compiled::And(parents) => {
                let mut all = true;
                for &p in parents {
                    all &= values[p]
                        .as_bool()
                        .ok_or_else(|| fail("boolean parent expected".into()))?;
                }
                Value::Bool(all)
            }
            Compiled::Sum(parents) => {
                Value::Real(parents.iter().map(|&p| real(p)).sum())
            }
            Compiled::Relu(parent) => Value::Real(real(*parent).max(0.0)),
            Compiled::Affine { beta, hi, lo } => {
                Value::Real(beta * real(*hi) + (1.0 - beta) * real(*lo))
            }
            Compiled::Formula { formula, args, noise } => {
                let a = |i: usize| real(args[i]);
                let x = eval_formula(formula, args, &a).map_err(|e| fail(e))?;
                let x = match noise {
                    None => x,
                    Some(d) => {
                        x + d
                            .sample(stream)
                            .as_real()
                            .ok_or_else(|| fail("formula noise must be real-valued".into()))?
                    }
                };
                Value::Real(x)
            }
        };
        // Index-valued draws land in the node's domain representation.
        let value = match (value, &self.domains[node]) {
            (Value::Cat(i), Domain::Discrete { .. }) => Value::Int(i64::from(i)),
            (Value::Cat(i), Domain::Boolean) => Value::Bool(i == 1),
            (v, _) => v,
        };
        if !self.domains[node].contains(&value) {
            return Err(fail(format!("value {value} escapes the node domain")));
        }
        Ok(value)
    }
}

fn eval_formula(
    formula: &FormulaId,
    args: &[usize],
    a: &dyn Fn(usize) -> f64,
) -> Result<f64, String> {
    let err = |e: physics::PhysicsError| e.to_string();
    match formula {
        FormulaId::EffectiveElasticity => physics::effective_elasticity(a(0), a(1)).map_err(err),
        FormulaId::DeltaDMax | FormulaId::DeltaDMin => {
            let (x, y) = (a(0), a(1));
            if x.is_finite() && y.is_finite() {
                Ok(x - y)
            } else {
                Err("non-finite diameter".into())
            }
        }
        FormulaId::PfStiffness { k_ref, dd_ref, e_ref } => {
            physics::pf_stiffness(*k_ref, a(0), *dd_ref, a(1), *e_ref).map_err(err)
        }
        FormulaId::TotalStiffness { k_machine } => {
            physics::total_stiffness(*k_machine, a(0)).map_err(err)
        }
        FormulaId::PressingForce => physics::pressing_force(a(0), a(1)).map_err(err),
        FormulaId::DeltaSGrad => Ok(physics::displacement(a(0), a(1), 0.0).map_err(err)?.0),
        FormulaId::SGrad { s0 } => {
            let ds = a(0);
            if ds.is_finite() {
                Ok(s0 + ds)
            } else {
                Err("non-finite displacement".into())
            }
        }
        FormulaId::DeltaSMax { k_machine } => {
            Ok(physics::max_force_and_displacement(0.0, a(0), *k_machine, 0.0)
                .map_err(err)?
                .1)
        }
        FormulaId::ChamberMaxForce => {
            let mut best = f64::NEG_INFINITY;
            for i in 0..args.len() {
                let x = a(i);
                if !x.is_finite() {
                    return Err("non-finite force".into());
                }
                best = best.max(x);
            }
            Ok(best)
        }
        FormulaId::DeltaForceRelu { f_lim } => physics::delta_force_relu(a(0), *f_lim).map_err(err),
        FormulaId::LeakTolMachine { leak_tol_0, leak_tol_ref, d_force_ref } => {
            physics::leak_tol_machine(*leak_tol_0, *leak_tol_ref, a(0), *d_force_ref).map_err(err)
        }
        FormulaId::LeakAreaPf { beta_asym } => {
            physics::leak_area_pf(a(0), a(1), a(2), *beta_asym).map_err(err)
        }
    }
}

/// Pin parametrization and batch-drawn parameter values, apply interventions,
/// and return the post-surgery graph.
fn surgered_graph(
    graph: &ScmGraph,
    batch: &BatchConfig,
    master_seed: u64,
) -> Result<ScmGraph, SampleError> {
    let mut out = graph.clone();

    for (target, value) in &batch.parametrization {
        let node = out.node(*target)?;
        if !graph.parameter_nodes.contains(target) {
            return Err(SampleError::NotAParameterNode(node.name.clone()));
        }
        if !node.domain.contains(value) {
            return Err(SampleError::BadParametrization {
                node: node.name.clone(),
                value: value.to_string(),
            });
        }
        out = out.intervene(&Intervention::hard(*target, *value))?;
    }

    // Unpinned parameter nodes: one draw per batch from their own
    // distribution, then pinned so the whole batch shares the value.
    let pinned: Vec<_> = batch.parametrization.iter().map(|(id, _)| *id).collect();
    for &param in &graph.parameter_nodes {
        if pinned.contains(&param) {
            continue;
        }
        let node = out.node(param)?;
        let value = match &node.mechanism {
            Mechanism::ExogenousNoise { distribution } => {
                let mut stream =
                    NoiseStream::for_node(master_seed, batch.batch_id, PARAM_DRAW_ROW, param.0.into());
                distribution.sample(&mut stream)
            }
            _ => {
                return Err(SampleError::NotAParameterNode(node.name.clone()));
            }
        };
        out = out.intervene(&Intervention::hard(param, value))?;
    }

    for intervention in &batch.interventions {
        out = out.intervene(intervention)?;
    }

    let report = validate_graph(&out);
    if !report.is_ok() {
        return Err(SampleError::InvalidGraph(report.to_string()));
    }
    Ok(out)
}

/// Worker-owned mutable views of the column buffers for one row range.
enum ColChunk<'a> {
    Real(&'a mut [f64]),
    Bool(&'a mut [bool]),
    Int(&'a mut [i64]),
    Cat(&'a mut [u32]),
}

impl<'a> ColChunk<'a> {
    fn write(&mut self, row: usize, value: Value) {
        match (self, value) {
            (ColChunk::Real(v), Value::Real(x)) => v[row] = x,
            (ColChunk::Bool(v), Value::Bool(x)) => v[row] = x,
            (ColChunk::Int(v), Value::Int(x)) => v[row] = x,
            (ColChunk::Cat(v), Value::Cat(x)) => v[row] = x,
            _ => panic!("column/value type mismatch"),
        }
    }
}

fn zeroed_column(domain: &Domain, n: usize) -> Column {
    match domain {
        Domain::Continuous { .. } => Column::Real(vec![0.0; n]),
        Domain::Boolean => Column::Bool(vec![false; n]),
        Domain::Discrete { .. } => Column::Int(vec![0; n]),
        Domain::Categorical { .. } => Column::Cat(vec![0; n]),
    }
}

fn split_slice<'a, T>(v: &'a mut [T], bounds: &[usize], out: &mut Vec<&'a mut [T]>) {
    let mut rest = v;
    for w in 0..bounds.len() - 1 {
        let (head, tail) = rest.split_at_mut(bounds[w + 1] - bounds[w]);
        out.push(head);
        rest = tail;
    }
}

/// Split every column at the same row boundaries so each worker owns a
/// disjoint row range of all columns.
fn split_columns<'a>(data: &'a mut [Column], bounds: &[usize]) -> Vec<Vec<ColChunk<'a>>> {
    let workers = bounds.len().saturating_sub(1);
    let mut chunks: Vec<Vec<ColChunk<'a>>> =
        (0..workers).map(|_| Vec::with_capacity(data.len())).collect();
    for col in data.iter_mut() {
        match col {
            Column::Real(v) => {
                let mut parts = Vec::with_capacity(workers);
                split_slice(v, bounds, &mut parts);
                for (w, part) in parts.into_iter().enumerate() {
                    chunks[w].push(ColChunk::Real(part));
                }
            }
            Column::Bool(v) => {
                let mut parts = Vec::with_capacity(workers);
                split_slice(v, bounds, &mut parts);
                for (w, part) in parts.into_iter().enumerate() {
                    chunks[w].push(ColChunk::Bool(part));
                }
            }
            Column::Int(v) => {
                let mut parts = Vec::with_capacity(workers);
                split_slice(v, bounds, &mut parts);
                for (w, part) in parts.into_iter().enumerate() {
                    chunks[w].push(ColChunk::Int(part));
                }
            }
            Column::Cat(v) => {
                let mut parts = Vec::with_capacity(workers);
                split_slice(v, bounds, &mut parts);
                for (w, part) in parts.into_iter().enumerate() {
                    chunks[w].push(ColChunk::Cat(part));
                }
            }
        }
    }
    chunks
}

/// Sample one batch. Output contains ALL nodes (latents included) plus
/// visibility tags; strip latents with [`super::observe`].
pub fn sample_batch(
    graph: &ScmGraph,
    batch: &BatchConfig,
    master_seed: u64,
    options: SampleOptions,
) -> Result<Dataset, SampleError> {
    if batch.n_samples == 0 {
        return Err(SampleError::EmptyBatch);
    }
    let surgered = surgered_graph(graph, batch, master_seed)?;
    let compiled = compile(&surgered)?;

    let n = batch.n_samples as usize;
    let n_nodes = surgered.len();
    let mut data: Vec<Column> = surgered
        .nodes
        .iter()
        .map(|node| zeroed_column(&node.domain, n))
        .collect();

    let workers = options.threads.max(1).min(n);
    let mut bounds = Vec::with_capacity(workers + 1);
    for w in 0..=workers {
        bounds.push(w * n / workers);
    }

    let compiled_ref = &compiled;
    let batch_id = batch.batch_id;

    let mut failure: Option<SampleError> = None;
    std::thread::scope(|scope| {
        let chunk_sets = split_columns(&mut data, &bounds);
        let mut handles = Vec::with_capacity(chunk_sets.len());
        for (w, mut cols) in chunk_sets.into_iter().enumerate() {
            let start = bounds[w];
            let len = bounds[w + 1] - bounds[w];
            handles.push(scope.spawn(move || -> Result<(), SampleError> {
                let mut values = vec![Value::Real(0.0); n_nodes];
                for local in 0..len {
                    let row = (start + local) as u64;
                    for &node in &compiled_ref.order {
                        let mut stream =
                            NoiseStream::for_node(master_seed, batch_id, row, node as u64);
                        values[node] = compiled_ref.eval_node(node, &values, &mut stream)?;
                    }
                    for (col, &value) in cols.iter_mut().zip(values.iter()) {
                        col.write(local, value);
                    }
                }
                Ok(())
            }));
        }
        for handle in handles {
            if let Err(e) = handle.join().expect("sampling worker panicked") {
                failure.get_or_insert(e);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let columns = surgered
        .nodes
        .iter()
        .map(|node| ColumnSpec {
            name: node.name.clone(),
            domain: node.domain.clone(),
            visibility: node.visibility,
        })
        .collect();

    Ok(Dataset {
        columns,
        data,
        batch_ids: vec![batch.batch_id; n],
        seed: master_seed,
        graph_fingerprint: graph.fingerprint(),
        batches: vec![BatchMeta {
            batch_id: batch.batch_id,
            n_samples: batch.n_samples,
            parametrization: batch.parametrization.clone(),
            interventions: batch.interventions.clone(),
        }],
    })
}

/// Sample a schedule of batches and concatenate in batch order. Each batch's
/// rows depend only on (graph, batch, master_seed), never on the rest of the
/// schedule.
pub fn sample_schedule(
    graph: &ScmGraph,
    batches: &[BatchConfig],
    master_seed: u64,
    options: SampleOptions,
) -> Result<Dataset, SampleError> {
    let mut seen = std::collections::HashSet::new();
    for b in batches {
        if !seen.insert(b.batch_id) {
            return Err(SampleError::DuplicateBatchId(b.batch_id));
        }
    }
    if batches.is_empty() {
        return Err(SampleError::EmptyBatch);
    }
    let mut parts = Vec::with_capacity(batches.len());
    for batch in batches {
        parts.push(sample_batch(graph, batch, master_seed, options)?);
    }
    Ok(Dataset::concat(parts))
}
