//! Nonparametric estimators of differential entropy, mutual information and
//! conditional mutual information from k-nearest-neighbor statistics.
//!
//! All estimates are in nats. Distances are Chebyshev (max-norm) over the
//! joint space; marginal counts use strict inequality against the k-th
//! neighbor radius, matching KSG algorithm 1. Per-point contributions are
//! computed in parallel but reduced sequentially in sample order, so results
//! are bit-identical for any worker count.

use crate::error::{Error, Result};
use crate::knn::{KdTree, MarginalIndex, PointSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

/// How conditional mutual information is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CmiMode {
    /// Joint-space k-th neighbor radius with marginal counts in (x,z),
    /// (y,z) and (z) — the direct conditional estimator and the default.
    #[default]
    Direct,
    /// I(x;y|z) = I(x;(y,z)) - I(x;z), two plain KSG estimates, kept as a
    /// cross-check mode.
    ChainRule,
}

impl CmiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CmiMode::Direct => "direct",
            CmiMode::ChainRule => "chain_rule",
        }
    }
}

impl std::str::FromStr for CmiMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(CmiMode::Direct),
            "chain_rule" | "chain-rule" | "chain" => Ok(CmiMode::ChainRule),
            other => Err(Error::InvalidParam(format!("unknown cmi mode '{other}'"))),
        }
    }
}

/// Estimator settings. Metric is Chebyshev and units are nats throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    /// Neighbor count for the k-NN statistics.
    pub k: usize,
    pub cmi_mode: CmiMode,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            k: 4,
            cmi_mode: CmiMode::default(),
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_sample_count(m: usize, k: usize) -> Result<()> {
    if m <= k {
        return Err(Error::InsufficientSamples {
            required: k + 1,
            actual: m,
        });
    }
    Ok(())
}

/// psi(1..=max) lookup; index 0 is unused.
fn digamma_table(max: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(max + 1);
    t.push(f64::NAN);
    for i in 1..=max {
        t.push(digamma(i as f64));
    }
    t
}

/// Kozachenko-Leonenko differential entropy of a d-dimensional sample:
/// psi(M) - psi(k) + d * mean(ln 2 eps_i), eps_i the k-th neighbor distance.
pub fn entropy_kl(points: &PointSet, params: &EstimatorParams) -> Result<f64> {
    params.validate()?;
    let m = points.n;
    let k = params.k;
    check_sample_count(m, k)?;
    let tree = KdTree::build(points);

    let logs: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            // k-th neighbor excluding self = (k+1)-th including self
            let eps = tree.kth_distance(points.row(i), k + 1);
            if eps <= 0.0 {
                return Err(Error::Numerical(format!(
                    "duplicate points: zero k-th neighbor distance at sample {i}"
                )));
            }
            Ok((2.0 * eps).ln())
        })
        .collect::<Result<Vec<f64>>>()?;

    let mean_log: f64 = logs.iter().sum::<f64>() / m as f64;
    Ok(digamma(m as f64) - digamma(k as f64) + points.dim as f64 * mean_log)
}

/// KSG algorithm-1 mutual information between two blocks sharing M rows.
pub fn mi_ksg(x: &PointSet, y: &PointSet, params: &EstimatorParams) -> Result<f64> {
    cmi_ksg(x, y, None, params)
}

/// Direct conditional mutual information I(x;y|z) (Frenzel-Pompe style).
/// With an empty conditioning block this is exactly `mi_ksg`, bit for bit.
pub fn cmi_ksg(
    x: &PointSet,
    y: &PointSet,
    z: Option<&PointSet>,
    params: &EstimatorParams,
) -> Result<f64> {
    params.validate()?;
    let m = x.n;
    if y.n != m || z.map_or(false, |z| z.n != m) {
        return Err(Error::InvalidParam(format!(
            "block row counts differ: x has {m}, y has {}, z has {:?}",
            y.n,
            z.map(|z| z.n)
        )));
    }
    let k = params.k;
    check_sample_count(m, k)?;

    let joint = hconcat3(x, y, z);
    let xz = match z {
        Some(z) => hconcat(x, z),
        None => x.clone(),
    };
    let yz = match z {
        Some(z) => hconcat(y, z),
        None => y.clone(),
    };

    let joint_tree = KdTree::build(&joint);
    let xz_idx = MarginalIndex::build(Some(&xz), m);
    let yz_idx = MarginalIndex::build(Some(&yz), m);
    let z_idx = MarginalIndex::build(z, m);

    let psi = digamma_table(m);

    let contributions: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let eps = joint_tree.kth_distance(joint.row(i), k + 1);
            if eps <= 0.0 {
                return Err(Error::Numerical(format!(
                    "duplicate points: zero k-th neighbor distance at sample {i}"
                )));
            }
            // counts include the query sample itself, so they are n + 1 in
            // the usual formula's notation
            let c_xz = xz_idx.count_within_strict(xz.row(i), eps);
            let c_yz = yz_idx.count_within_strict(yz.row(i), eps);
            let c_z = z_idx.count_within_strict(z.map_or([].as_slice(), |zp| zp.row(i)), eps);
            Ok(psi[c_xz] + psi[c_yz] - psi[c_z])
        })
        .collect::<Result<Vec<f64>>>()?;

    let mean: f64 = contributions.iter().sum::<f64>() / m as f64;
    Ok(digamma(k as f64) - mean)
}

/// Chain-rule conditional mutual information: I(x;(y,z)) - I(x;z).
pub fn cmi_chain(
    x: &PointSet,
    y: &PointSet,
    z: Option<&PointSet>,
    params: &EstimatorParams,
) -> Result<f64> {
    match z {
        None => mi_ksg(x, y, params),
        Some(z) => {
            let yz = hconcat(y, z);
            Ok(mi_ksg(x, &yz, params)? - mi_ksg(x, z, params)?)
        }
    }
}

/// Conditional MI via the mode selected in `params`.
pub fn cmi(
    x: &PointSet,
    y: &PointSet,
    z: Option<&PointSet>,
    params: &EstimatorParams,
) -> Result<f64> {
    match params.cmi_mode {
        CmiMode::Direct => cmi_ksg(x, y, z, params),
        CmiMode::ChainRule => cmi_chain(x, y, z, params),
    }
}

pub fn hconcat(a: &PointSet, b: &PointSet) -> PointSet {
    debug_assert_eq!(a.n, b.n);
    let n = a.n;
    let dim = a.dim + b.dim;
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        data.extend_from_slice(a.row(i));
        data.extend_from_slice(b.row(i));
    }
    PointSet { data, n, dim }
}

fn hconcat3(a: &PointSet, b: &PointSet, c: Option<&PointSet>) -> PointSet {
    let n = a.n;
    let dim = a.dim + b.dim + c.map_or(0, |c| c.dim);
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        data.extend_from_slice(a.row(i));
        data.extend_from_slice(b.row(i));
        if let Some(c) = c {
            data.extend_from_slice(c.row(i));
        }
    }
    PointSet { data, n, dim }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_cols(n: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..cols)
            .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect()
    }

    fn ps(cols: &[&[f64]]) -> PointSet {
        PointSet::from_columns(cols)
    }

    #[test]
    fn entropy_uniform_is_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let vals: Vec<f64> = (0..100_000).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
        let h = entropy_kl(&ps(&[&vals]), &EstimatorParams::default()).unwrap();
        assert!(h.abs() < 0.01, "h = {h}");
    }

    #[test]
    fn entropy_gaussian_closed_form() {
        let cols = gaussian_cols(100_000, 1, 11);
        let h = entropy_kl(&ps(&[&cols[0]]), &EstimatorParams::default()).unwrap();
        let expected = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((h - expected).abs() < 0.01, "h = {h}, expected {expected}");
    }

    #[test]
    fn entropy_scaling_shift() {
        let cols = gaussian_cols(100_000, 1, 13);
        let scaled: Vec<f64> = cols[0].iter().map(|v| v * 3.0).collect();
        let params = EstimatorParams::default();
        let h1 = entropy_kl(&ps(&[&cols[0]]), &params).unwrap();
        let h2 = entropy_kl(&ps(&[&scaled]), &params).unwrap();
        assert!((h2 - h1 - 3.0f64.ln()).abs() < 0.005, "shift {}", h2 - h1);
    }

    #[test]
    fn entropy_duplicate_points_error() {
        let vals = vec![1.0, 2.0, 2.0, 3.0, 4.0, 5.0];
        let err = entropy_kl(&ps(&[&vals]), &EstimatorParams { k: 1, ..Default::default() });
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn mi_independent_near_zero() {
        let cols = gaussian_cols(50_000, 2, 17);
        let mi = mi_ksg(&ps(&[&cols[0]]), &ps(&[&cols[1]]), &EstimatorParams::default()).unwrap();
        assert!(mi.abs() < 0.01, "mi = {mi}");
    }

    #[test]
    fn mi_correlated_gaussian() {
        let rho = 0.5;
        let cols = gaussian_cols(10_000, 2, 19);
        let y: Vec<f64> = cols[0]
            .iter()
            .zip(&cols[1])
            .map(|(x, e)| rho * x + (1.0f64 - rho * rho).sqrt() * e)
            .collect();
        let mi = mi_ksg(&ps(&[&cols[0]]), &ps(&[&y]), &EstimatorParams::default()).unwrap();
        let expected = -0.5 * (1.0f64 - rho * rho).ln();
        assert!((mi - expected).abs() < 0.01, "mi = {mi}, expected {expected}");
    }

    #[test]
    fn mi_is_symmetric_bit_for_bit() {
        let cols = gaussian_cols(2_000, 2, 23);
        let y: Vec<f64> = cols[0]
            .iter()
            .zip(&cols[1])
            .map(|(x, e)| 0.7 * x + e)
            .collect();
        let params = EstimatorParams::default();
        let a = mi_ksg(&ps(&[&cols[0]]), &ps(&[&y]), &params).unwrap();
        let b = mi_ksg(&ps(&[&y]), &ps(&[&cols[0]]), &params).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn cmi_empty_conditioning_equals_mi_bit_for_bit() {
        let cols = gaussian_cols(3_000, 2, 29);
        let params = EstimatorParams::default();
        let a = mi_ksg(&ps(&[&cols[0]]), &ps(&[&cols[1]]), &params).unwrap();
        let b = cmi_ksg(&ps(&[&cols[0]]), &ps(&[&cols[1]]), None, &params).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = cmi_chain(&ps(&[&cols[0]]), &ps(&[&cols[1]]), None, &params).unwrap();
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn cmi_independent_triple_near_zero() {
        let cols = gaussian_cols(50_000, 3, 31);
        let params = EstimatorParams::default();
        let v = cmi_ksg(
            &ps(&[&cols[0]]),
            &ps(&[&cols[1]]),
            Some(&ps(&[&cols[2]])),
            &params,
        )
        .unwrap();
        assert!(v.abs() < 0.01, "cmi = {v}");
    }

    #[test]
    fn mismatched_rows_error() {
        let a = ps(&[&[1.0, 2.0, 3.0]]);
        let b = ps(&[&[1.0, 2.0]]);
        assert!(mi_ksg(&a, &b, &EstimatorParams::default()).is_err());
    }

    #[test]
    fn too_few_samples_error() {
        let a = ps(&[&[1.0, 2.0, 3.0]]);
        let b = ps(&[&[2.0, 1.0, 0.0]]);
        assert!(matches!(
            mi_ksg(&a, &b, &EstimatorParams::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
