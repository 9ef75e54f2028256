//! Deterministic transforms applied before estimation: the Gaussian-rank
//! transform with tail truncation, centered moving averages, and seeded
//! noise injection.

use crate::error::{Error, Result};
use crate::model::ProcessSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

/// Fraction of the distribution cut off each tail by default.
pub const DEFAULT_TAIL_CUT: f64 = 0.0425;

/// Map a series onto a truncated standard Gaussian by ranks.
///
/// Sample with 1-based rank r among T maps to the standard-normal quantile of
/// u = tail_cut + (r - 0.5) / T * (1 - 2 tail_cut), so the image is the same
/// fixed grid for any input and the map is invariant under strictly
/// increasing transforms of the input. Ties break by sample index.
pub fn gauss_rank_transform_values(values: &[f64], tail_cut: f64) -> Result<Vec<f64>> {
    let t = values.len();
    if t < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: t,
        });
    }
    if !(0.0..0.5).contains(&tail_cut) {
        return Err(Error::InvalidParam(format!(
            "tail_cut {tail_cut} outside [0, 0.5)"
        )));
    }
    if values.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSeries("<unnamed>".into()));
    }

    let mut order: Vec<usize> = (0..t).collect();
    // stable sort on value keeps sample order within ties
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());

    let normal = Normal::new(0.0, 1.0).unwrap();
    let span = 1.0 - 2.0 * tail_cut;
    let mut out = vec![0.0; t];
    for (rank0, &idx) in order.iter().enumerate() {
        let u = tail_cut + (rank0 as f64 + 0.5) / t as f64 * span;
        out[idx] = normal.inverse_cdf(u);
    }
    Ok(out)
}

/// `gauss_rank_transform_values` on a named series; errors carry the name.
pub fn gauss_rank_transform(series: &ProcessSeries, tail_cut: f64) -> Result<ProcessSeries> {
    let values = gauss_rank_transform_values(&series.values, tail_cut).map_err(|e| match e {
        Error::DegenerateSeries(_) => Error::DegenerateSeries(series.name.clone()),
        other => other,
    })?;
    ProcessSeries::new(series.name.clone(), values)
}

/// Centered moving average with an odd window; edges are dropped so the
/// output has length T - window + 1.
pub fn moving_average(series: &ProcessSeries, window: usize) -> Result<ProcessSeries> {
    let t = series.len();
    if window % 2 == 0 || window == 0 {
        return Err(Error::InvalidParam(format!(
            "moving average window {window} must be odd and >= 1"
        )));
    }
    if window > t {
        return Err(Error::InvalidParam(format!(
            "moving average window {window} exceeds series length {t}"
        )));
    }
    let inv = 1.0 / window as f64;
    let out: Vec<f64> = (0..=t - window)
        .map(|i| series.values[i..i + window].iter().sum::<f64>() * inv)
        .collect();
    ProcessSeries::new(series.name.clone(), out)
}

/// Add i.i.d. Gaussian noise of standard deviation `sigma`, reproducibly.
pub fn add_noise(series: &ProcessSeries, sigma: f64, seed: u64) -> Result<ProcessSeries> {
    if sigma < 0.0 {
        return Err(Error::InvalidParam(format!("negative sigma {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let out: Vec<f64> = series
        .values
        .iter()
        .map(|v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            v + sigma * n
        })
        .collect();
    ProcessSeries::new(series.name.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(vals: Vec<f64>) -> ProcessSeries {
        ProcessSeries::new("s", vals).unwrap()
    }

    #[test]
    fn rank_transform_small_grid() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let out = gauss_rank_transform_values(&[10.0, 20.0, 30.0], 0.0).unwrap();
        assert!((out[0] - normal.inverse_cdf(1.0 / 6.0)).abs() < 1e-12);
        assert!(out[1].abs() < 1e-12); // median maps to 0
        assert!((out[2] - normal.inverse_cdf(5.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn rank_invariance_under_monotone_map() {
        let vals: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 / 10.0 - 5.0).collect();
        let mapped: Vec<f64> = vals.iter().map(|v| v.exp()).collect();
        let a = gauss_rank_transform_values(&vals, DEFAULT_TAIL_CUT).unwrap();
        let b = gauss_rank_transform_values(&mapped, DEFAULT_TAIL_CUT).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_transform_min_value_at_default_cut() {
        // smallest of T samples maps to the quantile at 0.0425 + 0.915 * 0.5/T
        let t = 10_000;
        let vals: Vec<f64> = (0..t).map(|i| ((i * 7919) % t) as f64).collect();
        let out = gauss_rank_transform_values(&vals, DEFAULT_TAIL_CUT).unwrap();
        let min = out.iter().cloned().fold(f64::INFINITY, f64::min);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let expected = normal.inverse_cdf(0.0425 + 0.915 * 0.5 / t as f64);
        assert!((min - expected).abs() < 1e-9, "min {min} vs {expected}");
    }

    #[test]
    fn rank_transform_degenerate_errors() {
        let s = ProcessSeries::new("flat", vec![1.0; 8]).unwrap();
        match gauss_rank_transform(&s, 0.0425) {
            Err(Error::DegenerateSeries(name)) => assert_eq!(name, "flat"),
            other => panic!("expected degenerate error, got {other:?}"),
        }
    }

    #[test]
    fn rank_transform_tie_handling_is_stable_and_distinct() {
        let out = gauss_rank_transform_values(&[1.0, 1.0, 0.5, 1.0], 0.0).unwrap();
        // ties keep sample order: index 0 < 1 < 3 among the three 1.0 values
        assert!(out[2] < out[0] && out[0] < out[1] && out[1] < out[3]);
        let mut sorted = out.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn moving_average_basics() {
        let s = series(vec![1., 2., 3., 4., 5.]);
        assert_eq!(moving_average(&s, 1).unwrap().values, s.values);
        assert_eq!(moving_average(&s, 5).unwrap().values, vec![3.0]);
        assert!(moving_average(&s, 4).is_err());
        assert!(moving_average(&s, 7).is_err());
    }

    #[test]
    fn moving_average_variance_reduction() {
        let t = 100_000;
        let noise = add_noise(&series(vec![0.0; t]), 1.0, 7).unwrap();
        let sm = moving_average(&noise, 5).unwrap();
        let mean = sm.values.iter().sum::<f64>() / sm.len() as f64;
        let var = sm.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / sm.len() as f64;
        assert!((var - 0.2).abs() < 0.01, "var {var}");
    }

    #[test]
    fn add_noise_props() {
        let s = series((0..100_000).map(|i| (i as f64).sin()).collect());
        assert_eq!(add_noise(&s, 0.0, 3).unwrap().values, s.values);
        let a = add_noise(&s, 0.1, 42).unwrap();
        let b = add_noise(&s, 0.1, 42).unwrap();
        assert_eq!(a.values, b.values);

        let diffs: Vec<f64> = a
            .values
            .iter()
            .zip(&s.values)
            .map(|(x, y)| x - y)
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let sd = (diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
            / (diffs.len() - 1) as f64)
            .sqrt();
        assert!((0.098..=0.102).contains(&sd), "sd {sd}");
    }
}
