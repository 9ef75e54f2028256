//! Time-series data model: named processes, lagged driver specifications and
//! the aligned sample matrix handed to the estimators.

use crate::error::{Error, Result};
use crate::estimators::EstimatorParams;
use crate::certainty::ReferenceKind;
use serde::{Deserialize, Serialize};

/// A single named real-valued process sampled at unit time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl ProcessSeries {
    /// Build a series, rejecting empty or non-finite data.
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InvalidParam(format!("series '{name}' is empty")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { name, index: i });
        }
        Ok(Self { name, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A collection of equally long series with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<ProcessSeries>,
}

impl Dataset {
    pub fn new(series: Vec<ProcessSeries>) -> Result<Self> {
        let first_len = match series.first() {
            Some(s) => s.len(),
            None => return Err(Error::InvalidParam("dataset has no series".into())),
        };
        let mut names: Vec<&str> = Vec::with_capacity(series.len());
        for s in &series {
            if s.len() != first_len {
                return Err(Error::LengthMismatch {
                    name: s.name.clone(),
                    len: s.len(),
                    expected: first_len,
                });
            }
            if names.contains(&s.name.as_str()) {
                return Err(Error::DuplicateName(s.name.clone()));
            }
            names.push(&s.name);
        }
        Ok(Self { series })
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn series(&self) -> &[ProcessSeries] {
        &self.series
    }

    pub fn get(&self, name: &str) -> Result<&ProcessSeries> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownProcess(name.to_string()))
    }

    /// Replace one series, keeping length and name checks intact.
    pub fn with_replaced(&self, series: ProcessSeries) -> Result<Self> {
        let mut out = self.clone();
        let slot = out
            .series
            .iter_mut()
            .find(|s| s.name == series.name)
            .ok_or_else(|| Error::UnknownProcess(series.name.clone()))?;
        if series.len() != slot.len() {
            return Err(Error::LengthMismatch {
                name: series.name.clone(),
                len: series.len(),
                expected: slot.len(),
            });
        }
        *slot = series;
        Ok(out)
    }
}

/// One driver: a process observed at one or more positive lags behind the
/// target sample. A multi-lag driver is treated as a single block in the
/// decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverSpec {
    pub process: String,
    pub lags: Vec<usize>,
}

impl DriverSpec {
    pub fn new(process: impl Into<String>, mut lags: Vec<usize>) -> Result<Self> {
        let process = process.into();
        if lags.is_empty() {
            return Err(Error::InvalidParam(format!(
                "driver '{process}' has no lags"
            )));
        }
        if lags.contains(&0) {
            return Err(Error::InvalidParam(format!(
                "driver '{process}' has lag 0; lags must be strictly positive"
            )));
        }
        lags.sort_unstable();
        if lags.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam(format!(
                "driver '{process}' has duplicate lags"
            )));
        }
        Ok(Self { process, lags })
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().unwrap()
    }
}

/// Full description of one decomposition run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub target: String,
    /// Positive lead of the target sample relative to driver time n:
    /// the target sample analyzed is x at n + lead.
    pub lead: usize,
    pub drivers: Vec<DriverSpec>,
    pub estimator: EstimatorParams,
    pub reference: ReferenceKind,
    /// Tail fraction cut from each side in the Gaussian-rank transform.
    pub tail_cut: f64,
}

impl AnalysisSpec {
    pub fn new(
        target: impl Into<String>,
        lead: usize,
        drivers: Vec<DriverSpec>,
        estimator: EstimatorParams,
        reference: ReferenceKind,
    ) -> Result<Self> {
        let spec = Self {
            target: target.into(),
            lead,
            drivers,
            estimator,
            reference,
            tail_cut: crate::preprocess::DEFAULT_TAIL_CUT,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lead < 1 {
            return Err(Error::InvalidParam(
                "target lead must be >= 1 (cause precedes effect)".into(),
            ));
        }
        if self.drivers.is_empty() {
            return Err(Error::InvalidParam("at least one driver required".into()));
        }
        for (i, a) in self.drivers.iter().enumerate() {
            for b in &self.drivers[i + 1..] {
                if a == b {
                    return Err(Error::InvalidParam(format!(
                        "driver '{}' with lags {:?} listed twice",
                        a.process, a.lags
                    )));
                }
            }
        }
        if !(0.0..0.5).contains(&self.tail_cut) {
            return Err(Error::InvalidParam(format!(
                "tail_cut {} outside [0, 0.5)",
                self.tail_cut
            )));
        }
        self.estimator.validate()
    }

    /// Number of rows lost at the front of the series: the target index
    /// starts at depth = lead + max lag - 1.
    pub fn depth(&self) -> usize {
        let max_lag = self.drivers.iter().map(|d| d.max_lag()).max().unwrap_or(1);
        self.lead + max_lag - 1
    }

    /// Display label for driver `i`; disambiguates drivers that reuse a
    /// process name with different lag sets.
    pub fn driver_label(&self, i: usize) -> String {
        let d = &self.drivers[i];
        let shared = self
            .drivers
            .iter()
            .filter(|o| o.process == d.process)
            .count();
        if shared > 1 {
            let lags: Vec<String> = d.lags.iter().map(|l| l.to_string()).collect();
            format!("{}@{}", d.process, lags.join(","))
        } else {
            d.process.clone()
        }
    }

    pub fn driver_labels(&self) -> Vec<String> {
        (0..self.drivers.len()).map(|i| self.driver_label(i)).collect()
    }
}

/// One multi-column driver block of the design matrix.
#[derive(Debug, Clone)]
pub struct DriverBlock {
    pub label: String,
    pub process: String,
    pub lags: Vec<usize>,
    /// One column per lag, each of length M, raw (untransformed) values.
    pub columns: Vec<Vec<f64>>,
}

/// Aligned samples: one target column plus one block per driver. Row m pairs
/// the target at time t = m + depth with each driver's sample at
/// t - lead - lag + 1. Rows with any out-of-range index are dropped.
///
/// Immutable after construction; shared read-only by estimator workers.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub target_name: String,
    pub lead: usize,
    /// Raw target column (length M).
    pub target: Vec<f64>,
    pub blocks: Vec<DriverBlock>,
    pub rows: usize,
}

impl DesignMatrix {
    pub fn driver_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_driver_columns(&self) -> usize {
        self.blocks.iter().map(|b| b.columns.len()).sum()
    }
}

/// Construct the aligned design matrix for a spec over a dataset.
pub fn build_design(dataset: &Dataset, spec: &AnalysisSpec) -> Result<DesignMatrix> {
    spec.validate()?;
    let t_len = dataset.len();
    let target_series = dataset.get(&spec.target)?;
    let depth = spec.depth();
    if depth >= t_len {
        return Err(Error::InsufficientSamples {
            required: depth + 1,
            actual: t_len,
        });
    }
    let rows = t_len - depth;
    let k = spec.estimator.k;
    if rows < k + 1 {
        return Err(Error::InsufficientSamples {
            required: k + 1,
            actual: rows,
        });
    }

    let target: Vec<f64> = target_series.values[depth..].to_vec();

    let labels = spec.driver_labels();
    let mut blocks = Vec::with_capacity(spec.drivers.len());
    for (i, d) in spec.drivers.iter().enumerate() {
        let series = dataset.get(&d.process)?;
        let mut columns = Vec::with_capacity(d.lags.len());
        for &lag in &d.lags {
            // target time t = m + depth; driver sample at t - lead - lag + 1
            let offset = depth - (spec.lead + lag - 1);
            columns.push(series.values[offset..offset + rows].to_vec());
        }
        blocks.push(DriverBlock {
            label: labels[i].clone(),
            process: d.process.clone(),
            lags: d.lags.clone(),
            columns,
        });
    }

    Ok(DesignMatrix {
        target_name: spec.target.clone(),
        lead: spec.lead,
        target,
        blocks,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certainty::ReferenceKind;
    use crate::estimators::EstimatorParams;

    fn spec(target: &str, lead: usize, drivers: Vec<DriverSpec>) -> AnalysisSpec {
        let mut params = EstimatorParams::default();
        params.k = 1;
        AnalysisSpec::new(target, lead, drivers, params, ReferenceKind::Cauchy).unwrap()
    }

    #[test]
    fn one_step_shift() {
        let ds = Dataset::new(vec![ProcessSeries::new("x", vec![1., 2., 3., 4., 5.]).unwrap()])
            .unwrap();
        let s = spec("x", 1, vec![DriverSpec::new("x", vec![1]).unwrap()]);
        let m = build_design(&ds, &s).unwrap();
        assert_eq!(m.rows, 4);
        assert_eq!(m.target, vec![2., 3., 4., 5.]);
        assert_eq!(m.blocks[0].columns[0], vec![1., 2., 3., 4.]);
    }

    #[test]
    fn model4_shape() {
        let t = 1000;
        let ramp: Vec<f64> = (0..t).map(|i| i as f64).collect();
        let ds = Dataset::new(vec![
            ProcessSeries::new("x", ramp.clone()).unwrap(),
            ProcessSeries::new("y", ramp.clone()).unwrap(),
            ProcessSeries::new("z", ramp).unwrap(),
        ])
        .unwrap();
        let s = spec(
            "x",
            1,
            vec![
                DriverSpec::new("y", vec![1, 2]).unwrap(),
                DriverSpec::new("z", vec![1, 2]).unwrap(),
                DriverSpec::new("x", vec![1]).unwrap(),
            ],
        );
        let m = build_design(&ds, &s).unwrap();
        assert_eq!(m.total_driver_columns(), 5);
        assert_eq!(m.rows, t - 2);
    }

    #[test]
    fn three_driver_lorenz_shape() {
        let vals: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let ds = Dataset::new(vec![
            ProcessSeries::new("x", vals.clone()).unwrap(),
            ProcessSeries::new("y", vals.clone()).unwrap(),
            ProcessSeries::new("z", vals).unwrap(),
        ])
        .unwrap();
        let s = spec(
            "x",
            1,
            vec![
                DriverSpec::new("x", vec![1]).unwrap(),
                DriverSpec::new("y", vec![1]).unwrap(),
                DriverSpec::new("z", vec![1]).unwrap(),
            ],
        );
        let m = build_design(&ds, &s).unwrap();
        assert_eq!(m.total_driver_columns(), 3);
        assert_eq!(m.rows, 49);
    }

    #[test]
    fn lag_convention_indices() {
        // lead 2, lag 3: driver sample at t - 2 - 3 + 1 = t - 4
        let vals: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ds = Dataset::new(vec![
            ProcessSeries::new("x", vals.clone()).unwrap(),
            ProcessSeries::new("y", vals).unwrap(),
        ])
        .unwrap();
        let s = spec("x", 2, vec![DriverSpec::new("y", vec![3]).unwrap()]);
        let m = build_design(&ds, &s).unwrap();
        // depth = 2 + 3 - 1 = 4, rows = 6, target starts at x[4]
        assert_eq!(m.rows, 6);
        assert_eq!(m.target[0], 4.0);
        assert_eq!(m.blocks[0].columns[0][0], 0.0);
        assert_eq!(m.blocks[0].columns[0][5], 5.0);
    }

    #[test]
    fn dataset_order_is_irrelevant() {
        let a: Vec<f64> = (0..20).map(|i| (i as f64) * 0.5).collect();
        let b: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        let ds1 = Dataset::new(vec![
            ProcessSeries::new("x", a.clone()).unwrap(),
            ProcessSeries::new("y", b.clone()).unwrap(),
        ])
        .unwrap();
        let ds2 = Dataset::new(vec![
            ProcessSeries::new("y", b).unwrap(),
            ProcessSeries::new("x", a).unwrap(),
        ])
        .unwrap();
        let s = spec("x", 1, vec![DriverSpec::new("y", vec![1, 2]).unwrap()]);
        let m1 = build_design(&ds1, &s).unwrap();
        let m2 = build_design(&ds2, &s).unwrap();
        assert_eq!(m1.target, m2.target);
        assert_eq!(m1.blocks[0].columns, m2.blocks[0].columns);
    }

    #[test]
    fn errors() {
        let ds = Dataset::new(vec![ProcessSeries::new("x", vec![1., 2., 3.]).unwrap()]).unwrap();
        let s = spec("q", 1, vec![DriverSpec::new("x", vec![1]).unwrap()]);
        assert!(matches!(
            build_design(&ds, &s),
            Err(Error::UnknownProcess(_))
        ));

        let s = spec("x", 1, vec![DriverSpec::new("x", vec![5]).unwrap()]);
        assert!(matches!(
            build_design(&ds, &s),
            Err(Error::InsufficientSamples { .. })
        ));

        assert!(ProcessSeries::new("bad", vec![1.0, f64::NAN]).is_err());
        assert!(DriverSpec::new("x", vec![]).is_err());
        assert!(DriverSpec::new("x", vec![0]).is_err());
        assert!(DriverSpec::new("x", vec![2, 2]).is_err());
        assert!(Dataset::new(vec![
            ProcessSeries::new("x", vec![1.0]).unwrap(),
            ProcessSeries::new("x", vec![2.0]).unwrap(),
        ])
        .is_err());
    }
}
