//! Exogenous noise distributions.

use crate::rng::NoiseStream;
use crate::value::Value;
use serde::{Deserialize, Serialize};

/// Closed set of noise distributions used by exogenous mechanisms and
/// interventions. `PointMass` is domain-polymorphic; the rest are real-valued
/// except `CategoricalDist`, which yields a category index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    Gaussian { mu: f64, sigma: f64 },
    /// Gaussian resampled until the draw is >= `lower`. Used for physically
    /// positive quantities (elasticities, diameters).
    TruncatedGaussian { mu: f64, sigma: f64, lower: f64 },
    /// |N(0, sigma)|; non-negative by construction.
    HalfNormal { sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    PointMass { value: Value },
    CategoricalDist { probabilities: Vec<f64> },
}

/// Probability vectors must sum to 1 within this slack.
pub const PROB_SUM_TOL: f64 = 1e-9;

impl Distribution {
    /// Structural well-formedness: positive sigmas, ordered bounds,
    /// normalized probabilities, finite constants.
    pub fn check(&self) -> Result<(), String> {
        match self {
            Distribution::Gaussian { mu, sigma }
            | Distribution::TruncatedGaussian { mu, sigma, .. } => {
                if !mu.is_finite() || !sigma.is_finite() {
                    return Err("non-finite gaussian parameter".into());
                }
                if *sigma <= 0.0 {
                    return Err(format!("sigma must be positive, got {sigma}"));
                }
                if let Distribution::TruncatedGaussian { lower, .. } = self {
                    if !lower.is_finite() {
                        return Err("non-finite truncation bound".into());
                    }
                }
                Ok(())
            }
            Distribution::HalfNormal { sigma } => {
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(format!("sigma must be positive, got {sigma}"));
                }
                Ok(())
            }
            Distribution::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err("non-finite uniform bound".into());
                }
                if lo >= hi {
                    return Err(format!("uniform requires lo < hi, got [{lo}, {hi}]"));
                }
                Ok(())
            }
            Distribution::PointMass { value } => {
                if let Value::Real(x) = value {
                    if !x.is_finite() {
                        return Err("non-finite point mass".into());
                    }
                }
                Ok(())
            }
            Distribution::CategoricalDist { probabilities } => {
                if probabilities.is_empty() {
                    return Err("empty probability vector".into());
                }
                if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err("probabilities must be finite and non-negative".into());
                }
                let sum: f64 = probabilities.iter().sum();
                if (sum - 1.0).abs() > PROB_SUM_TOL {
                    return Err(format!("probabilities sum to {sum}, expected 1"));
                }
                Ok(())
            }
        }
    }

    /// Draw one value from the stream.
    pub fn sample(&self, stream: &mut NoiseStream) -> Value {
        match self {
            Distribution::Gaussian { mu, sigma } => {
                Value::Real(mu + sigma * stream.next_standard_normal())
            }
            Distribution::TruncatedGaussian { mu, sigma, lower } => {
                loop {
                    let x = mu + sigma * stream.next_standard_normal();
                    if x >= *lower {
                        return Value::Real(x);
                    }
                }
            }
            Distribution::HalfNormal { sigma } => {
                Value::Real((sigma * stream.next_standard_normal()).abs())
            }
            Distribution::Uniform { lo, hi } => Value::Real(lo + (hi - lo) * stream.next_f64()),
            Distribution::PointMass { value } => *value,
            Distribution::CategoricalDist { probabilities } => {
                let u = stream.next_f64();
                let mut acc = 0.0;
                for (i, p) in probabilities.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return Value::Cat(i as u32);
                    }
                }
                Value::Cat(probabilities.len() as u32 - 1)
            }
        }
    }
}
