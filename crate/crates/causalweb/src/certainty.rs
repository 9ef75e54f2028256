//! Reference densities and the certainty measures W(x) and W(x|Y).
//!
//! W(x) is the relative entropy of the target's density with respect to a
//! wide reference density q and anchors the normalization; after dividing by
//! the total certainty it becomes the causal strength of unmodeled
//! processes. The reference kind used is recorded in every result.

use crate::error::{Error, Result};
use crate::estimators::{entropy_kl, EstimatorParams};
use crate::knn::PointSet;
use serde::{Deserialize, Serialize};

/// Estimates below this value trigger a diagnostic warning; W(x) is
/// theoretically non-negative but the estimator is reported raw.
pub const NEGATIVE_W_WARN: f64 = -0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    #[default]
    Cauchy,
    Gaussian,
    Uniform,
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cauchy" => Ok(ReferenceKind::Cauchy),
            "gaussian" => Ok(ReferenceKind::Gaussian),
            "uniform" => Ok(ReferenceKind::Uniform),
            other => Err(Error::InvalidParam(format!(
                "unknown reference density '{other}' (expected cauchy|gaussian|uniform)"
            ))),
        }
    }
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReferenceKind::Cauchy => "cauchy",
            ReferenceKind::Gaussian => "gaussian",
            ReferenceKind::Uniform => "uniform",
        };
        f.write_str(s)
    }
}

/// A fitted reference density q(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDensity {
    /// Width chosen so the density has the same entropy as a Gaussian with
    /// the sample's standard deviation: gamma = sqrt(e / 8 pi) * sigma.
    Cauchy { mu: f64, gamma: f64 },
    Gaussian { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ReferenceDensity {
    pub fn kind(&self) -> ReferenceKind {
        match self {
            ReferenceDensity::Cauchy { .. } => ReferenceKind::Cauchy,
            ReferenceDensity::Gaussian { .. } => ReferenceKind::Gaussian,
            ReferenceDensity::Uniform { .. } => ReferenceKind::Uniform,
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceDensity::Cauchy { mu, gamma } => {
                let d = x - mu;
                (gamma / std::f64::consts::PI).ln() - (gamma * gamma + d * d).ln()
            }
            ReferenceDensity::Gaussian { mu, sigma } => {
                let d = (x - mu) / sigma;
                -0.5 * d * d - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
            }
            ReferenceDensity::Uniform { lo, hi } => {
                if x < lo || x > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
        }
    }
}

/// Fit a reference density of the requested kind to target samples.
pub fn fit_reference(samples: &[f64], kind: ReferenceKind) -> Result<ReferenceDensity> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateSeries("<target>".into()));
    }
    let sigma = var.sqrt();
    Ok(match kind {
        ReferenceKind::Cauchy => ReferenceDensity::Cauchy {
            mu: mean,
            gamma: (std::f64::consts::E / (8.0 * std::f64::consts::PI)).sqrt() * sigma,
        },
        ReferenceKind::Gaussian => ReferenceDensity::Gaussian { mu: mean, sigma },
        ReferenceKind::Uniform => {
            let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ReferenceDensity::Uniform { lo, hi }
        }
    })
}

/// Self-certainty W(x) = -H(x) - mean_i log q(x_i) in nats.
///
/// Theoretically non-negative; estimator output may dip slightly below zero
/// and is returned raw (callers flag values below `NEGATIVE_W_WARN`).
pub fn self_certainty(samples: &[f64], q: &ReferenceDensity, params: &EstimatorParams) -> Result<f64> {
    let mut mean_log_q = 0.0;
    for (i, &v) in samples.iter().enumerate() {
        let lq = q.log_pdf(v);
        if !lq.is_finite() {
            return Err(Error::Numerical(format!(
                "sample {i} ({v}) outside the support of the {} reference",
                q.kind()
            )));
        }
        mean_log_q += lq;
    }
    mean_log_q /= samples.len() as f64;
    let h = entropy_kl(&PointSet::from_columns(&[samples]), params)?;
    Ok(-h - mean_log_q)
}

/// Total certainty W(x|Y) = W(x) + I(x; Y).
pub fn total_certainty(w_x: f64, i_full: f64) -> f64 {
    w_x + i_full
}
