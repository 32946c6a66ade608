//! File formats: CSV datasets, line-oriented graph/ADMG text files,
//! JSON schedules, and a lenient CSV table reader for metric inputs.

use causalman::projection::Admg;
use causalman::sampling::{BatchConfig, Column, ColumnSpec, Dataset};
use causalman::{Domain, Intervention, ScmGraph, Value, Visibility};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Input/config problems exit with 2, output I/O failures with 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read `{}`: {e}", path.display())))
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("cannot create `{}`: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))
}

/// Reals print with 17 significant digits, which round-trips f64 exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_safe(token: &str) -> Result<()> {
    if token.contains(',') || token.contains('"') || token.contains('\n') {
        return Err(CliError::usage(format!("token `{token}` is not CSV-safe")));
    }
    Ok(())
}

fn render_cell(spec: &ColumnSpec, value: Value) -> Result<String> {
    Ok(match (&spec.domain, value) {
        (_, Value::Real(x)) => format_real(x),
        (_, Value::Bool(b)) => b.to_string(),
        (_, Value::Int(i)) => i.to_string(),
        (Domain::Categorical { labels }, Value::Cat(i)) => {
            let label = &labels[i as usize];
            csv_safe(label)?;
            label.clone()
        }
        (_, Value::Cat(i)) => i.to_string(),
    })
}

/// Dataset as UTF-8 CSV: header row, comma-separated, booleans true/false,
/// categoricals as labels, batch_id as the last column.
pub fn dataset_to_csv(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    for spec in &dataset.columns {
        csv_safe(&spec.name)?;
        out.push_str(&spec.name);
        out.push(',');
    }
    out.push_str("batch_id\n");
    for row in 0..dataset.n_rows() {
        for (spec, col) in dataset.columns.iter().zip(&dataset.data) {
            out.push_str(&render_cell(spec, col.value(row))?);
            out.push(',');
        }
        let _ = write!(out, "{}", dataset.batch_ids[row]);
        out.push('\n');
    }
    Ok(out)
}

/// Parse a dataset written by [`dataset_to_csv`] back, using the column
/// specs for typing. Values reproduce exactly.
pub fn dataset_from_csv(text: &str, columns: &[ColumnSpec]) -> Result<Dataset> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::usage("empty CSV"))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() != columns.len() + 1 || names.last() != Some(&"batch_id") {
        return Err(CliError::usage("CSV header does not match the column specs"));
    }
    for (name, spec) in names.iter().zip(columns) {
        if *name != spec.name {
            return Err(CliError::usage(format!("unexpected column `{name}`")));
        }
    }

    let mut data: Vec<Column> = columns.iter().map(|c| Column::with_capacity(&c.domain, 0)).collect();
    let mut batch_ids = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() + 1 {
            return Err(CliError::usage(format!("row {} has {} cells", lineno + 2, cells.len())));
        }
        for ((cell, spec), col) in cells.iter().zip(columns).zip(&mut data) {
            let value = spec
                .domain
                .parse_value(cell)
                .ok_or_else(|| CliError::usage(format!("bad value `{cell}` in `{}`", spec.name)))?;
            col.push(value);
        }
        let id: u64 = cells[columns.len()]
            .parse()
            .map_err(|_| CliError::usage("bad batch_id"))?;
        batch_ids.push(id);
    }
    Ok(Dataset {
        columns: columns.to_vec(),
        data,
        batch_ids,
        seed: 0,
        graph_fingerprint: String::new(),
        batches: vec![],
    })
}

fn domain_text(domain: &Domain) -> String {
    match domain {
        Domain::Continuous { unit } if unit.is_empty() => "continuous".into(),
        Domain::Continuous { unit } => format!("continuous[{unit}]"),
        Domain::Boolean => "boolean".into(),
        Domain::Discrete { cardinality } => format!("discrete[{cardinality}]"),
        Domain::Categorical { labels } => format!("categorical[{}]", labels.join("|")),
    }
}

/// Line-oriented graph export: `node <name> <domain> <visibility>` lines,
/// then `edge <a> -> <b>` lines. Mechanisms live in the JSON serialization.
pub fn graph_to_text(graph: &ScmGraph) -> String {
    let mut out = String::new();
    for node in &graph.nodes {
        let vis = match node.visibility {
            Visibility::Observable => "observable",
            Visibility::Latent => "latent",
        };
        let _ = writeln!(out, "node {} {} {vis}", node.name, domain_text(&node.domain));
    }
    for (a, b) in graph.edges() {
        let _ = writeln!(
            out,
            "edge {} -> {}",
            graph.nodes[a.index()].name,
            graph.nodes[b.index()].name
        );
    }
    out
}

/// ADMG export in the same format with `->` and `<->` edge tags.
pub fn admg_to_text(admg: &Admg) -> String {
    let mut out = String::new();
    for name in &admg.nodes {
        let _ = writeln!(out, "node {name}");
    }
    for &(a, b) in &admg.directed {
        let _ = writeln!(out, "edge {} -> {}", admg.nodes[a], admg.nodes[b]);
    }
    for &(a, b) in &admg.bidirected {
        let _ = writeln!(out, "edge {} <-> {}", admg.nodes[a], admg.nodes[b]);
    }
    out
}

/// Edge lists parsed back from graph/ADMG text files.
pub struct EdgeList {
    pub nodes: Vec<String>,
    pub directed: Vec<(usize, usize)>,
    pub bidirected: Vec<(usize, usize)>,
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut nodes: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || CliError::usage(format!("bad edge-list line {}: `{line}`", lineno + 1));
        match fields.first() {
            Some(&"node") if fields.len() >= 2 => {
                let name = fields[1].to_string();
                if !index.contains_key(&name) {
                    index.insert(name.clone(), nodes.len());
                    nodes.push(name);
                }
            }
            Some(&"edge") if fields.len() == 4 => {
                let mut resolve = |name: &str| -> usize {
                    *index.entry(name.to_string()).or_insert_with(|| {
                        nodes.push(name.to_string());
                        nodes.len() - 1
                    })
                };
                let a = resolve(fields[1]);
                let b = resolve(fields[3]);
                match fields[2] {
                    "->" => directed.push((a, b)),
                    "<->" => bidirected.push((a.min(b), a.max(b))),
                    _ => return Err(bad()),
                }
            }
            _ => return Err(bad()),
        }
    }
    Ok(EdgeList { nodes, directed, bidirected })
}

/// One hard intervention in a schedule or on the command line, addressed by
/// name with the value as a text token.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedDo {
    pub node: String,
    pub value: String,
}

/// Human-editable schedule file (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub batches: Vec<ScheduleBatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleBatch {
    pub batch_id: u64,
    pub n_samples: u64,
    /// Parameter-node pins: node name -> value token.
    #[serde(default)]
    pub parametrization: BTreeMap<String, String>,
    #[serde(default)]
    pub interventions: Vec<NamedDo>,
}

pub fn parse_named_do(graph: &ScmGraph, spec: &NamedDo) -> Result<Intervention> {
    let node = graph
        .node_by_name(&spec.node)
        .map_err(|_| CliError::usage(format!("unknown node `{}`", spec.node)))?;
    let value = node.domain.parse_value(&spec.value).ok_or_else(|| {
        CliError::usage(format!(
            "value `{}` does not parse in the domain of `{}`",
            spec.value, spec.node
        ))
    })?;
    Ok(Intervention::hard(node.id, value))
}

pub fn resolve_schedule(graph: &ScmGraph, file: &ScheduleFile) -> Result<Vec<BatchConfig>> {
    let mut out = Vec::with_capacity(file.batches.len());
    for batch in &file.batches {
        let mut parametrization = Vec::new();
        for (name, token) in &batch.parametrization {
            let node = graph
                .node_by_name(name)
                .map_err(|_| CliError::usage(format!("unknown parameter node `{name}`")))?;
            let value = node.domain.parse_value(token).ok_or_else(|| {
                CliError::usage(format!("value `{token}` does not parse for `{name}`"))
            })?;
            parametrization.push((node.id, value));
        }
        let mut interventions = Vec::new();
        for spec in &batch.interventions {
            interventions.push(parse_named_do(graph, spec)?);
        }
        out.push(BatchConfig {
            batch_id: batch.batch_id,
            n_samples: batch.n_samples,
            parametrization,
            interventions,
        });
    }
    Ok(out)
}

/// Column of a loosely-typed CSV table (metric inputs from any source).
pub enum LooseColumn {
    Numeric(Vec<f64>),
    Labels(Vec<String>),
}

pub struct LooseTable {
    pub names: Vec<String>,
    pub columns: Vec<LooseColumn>,
}

impl LooseTable {
    pub fn column(&self, name: &str) -> Result<&LooseColumn> {
        let idx = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::usage(format!("unknown column `{name}`")))?;
        Ok(&self.columns[idx])
    }

    /// Numeric embedding: numbers as-is, true/false as 1/0; label columns
    /// refuse (they have no canonical order without a domain).
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>> {
        match self.column(name)? {
            LooseColumn::Numeric(v) => Ok(v.clone()),
            LooseColumn::Labels(_) => Err(CliError::usage(format!(
                "column `{name}` is not numeric"
            ))),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns
            .first()
            .map(|c| match c {
                LooseColumn::Numeric(v) => v.len(),
                LooseColumn::Labels(v) => v.len(),
            })
            .unwrap_or(0)
    }
}

fn parse_loose(cell: &str) -> Option<f64> {
    match cell {
        "true" => Some(1.0),
        "false" => Some(0.0),
        _ => cell.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

pub fn read_loose_table(text: &str) -> Result<LooseTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::usage("empty CSV"))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(CliError::usage(format!(
                "row {} has {} cells, expected {}",
                lineno + 2,
                cells.len(),
                names.len()
            )));
        }
        for (cell, col) in cells.iter().zip(&mut raw) {
            col.push(cell.trim().to_string());
        }
    }
    let columns = raw
        .into_iter()
        .map(|col| {
            let numeric: Option<Vec<f64>> = col.iter().map(|c| parse_loose(c)).collect();
            match numeric {
                Some(v) => LooseColumn::Numeric(v),
                None => LooseColumn::Labels(col),
            }
        })
        .collect();
    Ok(LooseTable { names, columns })
}
