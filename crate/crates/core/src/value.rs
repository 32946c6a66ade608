//! Runtime values and node domains.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Domain of a node. Mixed domains are first-class: continuous physical
/// quantities, boolean flags, bounded integers and labeled categoricals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Real-valued; `unit` is documentation only (mm, N, MPa, ...).
    Continuous { unit: String },
    Boolean,
    /// Integers in `0..cardinality`.
    Discrete { cardinality: u32 },
    /// Values are indices into `labels`.
    Categorical { labels: Vec<String> },
}

impl Domain {
    pub fn continuous(unit: &str) -> Self {
        Domain::Continuous { unit: unit.to_string() }
    }

    pub fn categorical<S: AsRef<str>>(labels: &[S]) -> Self {
        Domain::Categorical {
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// Number of category values, for domains addressable as table keys.
    pub fn cardinality(&self) -> Option<u32> {
        match self {
            Domain::Discrete { cardinality } => Some(*cardinality),
            Domain::Categorical { labels } => Some(labels.len() as u32),
            Domain::Boolean => Some(2),
            Domain::Continuous { .. } => None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Domain::Continuous { .. })
    }

    /// Parse a text token into a value of this domain. Booleans accept
    /// true/false and 1/0; categoricals match labels exactly.
    pub fn parse_value(&self, token: &str) -> Option<Value> {
        match self {
            Domain::Continuous { .. } => {
                let x: f64 = token.parse().ok()?;
                x.is_finite().then_some(Value::Real(x))
            }
            Domain::Boolean => match token {
                "true" | "1" => Some(Value::Bool(true)),
                "false" | "0" => Some(Value::Bool(false)),
                _ => None,
            },
            Domain::Discrete { cardinality } => {
                let i: i64 = token.parse().ok()?;
                (i >= 0 && (i as u64) < u64::from(*cardinality)).then_some(Value::Int(i))
            }
            Domain::Categorical { labels } => labels
                .iter()
                .position(|l| l == token)
                .map(|i| Value::Cat(i as u32)),
        }
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (Domain::Continuous { .. }, Value::Real(x)) => x.is_finite(),
            (Domain::Boolean, Value::Bool(_)) => true,
            (Domain::Discrete { cardinality }, Value::Int(i)) => {
                *i >= 0 && (*i as u64) < u64::from(*cardinality)
            }
            (Domain::Categorical { labels }, Value::Cat(i)) => (*i as usize) < labels.len(),
            _ => false,
        }
    }
}

/// A sampled value. Categoricals are stored as label indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    Bool(bool),
    Int(i64),
    Cat(u32),
}

impl Value {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Category index for table lookups (categorical, discrete or boolean).
    pub fn as_index(&self) -> Option<u32> {
        match self {
            Value::Cat(i) => Some(*i),
            Value::Int(i) if *i >= 0 => u32::try_from(*i).ok(),
            Value::Bool(b) => Some(u32::from(*b)),
            _ => None,
        }
    }

    /// Numeric embedding: reals as-is, booleans as 1/0, indices as integers.
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Real(x) => *x,
            Value::Bool(b) => f64::from(u8::from(*b)),
            Value::Int(i) => *i as f64,
            Value::Cat(i) => f64::from(*i),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Cat(i) => write!(f, "{i}"),
        }
    }
}
