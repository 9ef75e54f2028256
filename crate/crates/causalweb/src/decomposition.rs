//! The core algorithm: enumerate driver subsets, estimate the raw
//! conditional mutual information of each subset with the target, extract
//! pure mlinks by subtracting all strictly contained lower-order links,
//! aggregate per-driver totals with 1/m weights, and normalize everything by
//! the total certainty into causal strengths.
//!
//! Subset estimations are independent tasks evaluated concurrently over a
//! shared read-only design; the aggregation is a sequential reduction, so a
//! result is bit-identical for any worker count.

use crate::certainty::{
    fit_reference, self_certainty, total_certainty, ReferenceDensity, NEGATIVE_W_WARN,
};
use crate::error::{Error, Result};
use crate::estimators::{cmi_chain, cmi_ksg, mi_ksg, CmiMode, EstimatorParams};
use crate::knn::PointSet;
use crate::model::{build_design, AnalysisSpec, Dataset, DesignMatrix};
use crate::preprocess::gauss_rank_transform_values;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default cap on the driver count; the subset enumeration costs 2^N terms.
pub const DEFAULT_DRIVER_CAP: usize = 16;

/// Bitmask over drivers 1..N identifying a non-empty subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetKey(pub u32);

impl SubsetKey {
    pub fn full(n: usize) -> SubsetKey {
        SubsetKey(((1u64 << n) - 1) as u32)
    }

    pub fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, driver: usize) -> bool {
        self.0 & (1 << driver) != 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32usize).filter(move |i| mask & (1 << i) != 0)
    }

    /// Complement within an N-driver system.
    pub fn complement(self, n: usize) -> SubsetKey {
        SubsetKey(Self::full(n).0 & !self.0)
    }

    pub fn label(self, driver_labels: &[String]) -> String {
        let parts: Vec<&str> = self.members().map(|i| driver_labels[i].as_str()).collect();
        parts.join("+")
    }
}

/// Raw subset conditional MIs and the pure mlinks derived from them, indexed
/// by driver subset. Both tables hold exactly 2^N - 1 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MlinkTable {
    pub n_drivers: usize,
    raw: Vec<f64>,
    pure: Vec<f64>,
}

impl MlinkTable {
    pub fn from_raw(n_drivers: usize, raw: Vec<f64>) -> Result<MlinkTable> {
        let expected = (1usize << n_drivers) - 1;
        if raw.len() != expected {
            return Err(Error::InvalidParam(format!(
                "raw mlink table has {} entries, expected {expected}",
                raw.len()
            )));
        }
        let pure = pure_mlinks(&raw);
        Ok(MlinkTable {
            n_drivers,
            raw,
            pure,
        })
    }

    pub fn raw(&self, s: SubsetKey) -> f64 {
        self.raw[s.0 as usize - 1]
    }

    pub fn pure(&self, s: SubsetKey) -> f64 {
        self.pure[s.0 as usize - 1]
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw
    }

    pub fn pure_values(&self) -> &[f64] {
        &self.pure
    }

    /// All subset keys in increasing cardinality, ascending mask within each
    /// cardinality.
    pub fn keys(&self) -> Vec<SubsetKey> {
        let mut keys: Vec<SubsetKey> = (1..=(1u32 << self.n_drivers) - 1).map(SubsetKey).collect();
        keys.sort_by_key(|k| (k.cardinality(), k.0));
        keys
    }

    /// Sum of pure mlinks of each order m = 1..N that contain `driver`,
    /// before the 1/m weighting.
    pub fn order_sums(&self, driver: usize) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_drivers];
        for mask in 1..=(1u32 << self.n_drivers) - 1 {
            let key = SubsetKey(mask);
            if key.contains(driver) {
                sums[key.cardinality() - 1] += self.pure(key);
            }
        }
        sums
    }
}

/// Pure mlinks from a complete raw table (indexed by mask - 1):
/// pure(S) = raw(S) - sum over non-empty proper subsets T of pure(T),
/// computed in increasing subset order so lower orders are ready first.
pub fn pure_mlinks(raw: &[f64]) -> Vec<f64> {
    let mut pure = vec![0.0; raw.len()];
    for mask in 1..=raw.len() as u32 {
        let mut acc = 0.0;
        // proper non-empty submasks, descending
        let mut sub = (mask - 1) & mask;
        while sub != 0 {
            acc += pure[sub as usize - 1];
            sub = (sub - 1) & mask;
        }
        pure[mask as usize - 1] = raw[mask as usize - 1] - acc;
    }
    pure
}

/// Per-driver totals: total_i = sum over subsets S containing i of
/// pure(S) / |S|.
pub fn driver_totals(pure: &[f64], n_drivers: usize) -> Vec<f64> {
    let mut totals = vec![0.0; n_drivers];
    for mask in 1..=pure.len() as u32 {
        let key = SubsetKey(mask);
        let share = pure[mask as usize - 1] / key.cardinality() as f64;
        for m in key.members() {
            totals[m] += share;
        }
    }
    totals
}

/// Normalize totals and the self-certainty by W_total = W(x) + I_full.
pub fn causal_strengths(totals: &[f64], i_full: f64, w_x: f64) -> Result<(Vec<f64>, f64)> {
    let w_total = total_certainty(w_x, i_full);
    if !(w_total > 0.0) {
        return Err(Error::Numerical(format!(
            "non-positive total certainty {w_total}"
        )));
    }
    let cs: Vec<f64> = totals.iter().map(|t| t / w_total).collect();
    Ok((cs, w_x / w_total))
}

/// Design matrix after the Gaussian-rank transform, plus the raw target
/// column kept for the certainty estimate.
pub struct TransformedDesign {
    pub raw_target: Vec<f64>,
    pub target: PointSet,
    pub labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    block_ranges: Vec<(usize, usize)>,
    pub rows: usize,
}

impl TransformedDesign {
    pub fn new(design: &DesignMatrix, tail_cut: f64) -> Result<TransformedDesign> {
        let target_t = gauss_rank_transform_values(&design.target, tail_cut).map_err(|e| {
            match e {
                Error::DegenerateSeries(_) => Error::DegenerateSeries(design.target_name.clone()),
                other => other,
            }
        })?;
        let mut columns = Vec::with_capacity(design.total_driver_columns());
        let mut block_ranges = Vec::with_capacity(design.blocks.len());
        let mut labels = Vec::with_capacity(design.blocks.len());
        for block in &design.blocks {
            let start = columns.len();
            for col in &block.columns {
                let t = gauss_rank_transform_values(col, tail_cut).map_err(|e| match e {
                    Error::DegenerateSeries(_) => Error::DegenerateSeries(block.process.clone()),
                    other => other,
                })?;
                columns.push(t);
            }
            block_ranges.push((start, columns.len()));
            labels.push(block.label.clone());
        }
        Ok(TransformedDesign {
            raw_target: design.target.clone(),
            target: PointSet::from_columns(&[&target_t]),
            labels,
            columns,
            block_ranges,
            rows: design.rows,
        })
    }

    pub fn n_drivers(&self) -> usize {
        self.block_ranges.len()
    }

    /// Concatenated transformed columns of every driver in the subset, in
    /// driver order; None for the empty subset.
    pub fn block_points(&self, subset: SubsetKey) -> Option<PointSet> {
        let mut refs: Vec<&[f64]> = Vec::new();
        for d in subset.members() {
            if d >= self.block_ranges.len() {
                break;
            }
            let (s, e) = self.block_ranges[d];
            for c in s..e {
                refs.push(&self.columns[c]);
            }
        }
        if refs.is_empty() {
            None
        } else {
            Some(PointSet::from_columns(&refs))
        }
    }
}

/// Raw conditional MI of the target with subset S given the complement:
/// I(x; y_S | y_{S^c}); the full set gives the unconditioned I(x; y_{1:N}).
pub fn raw_cmi_for_subset(
    design: &TransformedDesign,
    subset: SubsetKey,
    params: &EstimatorParams,
) -> Result<f64> {
    let n = design.n_drivers();
    if subset.0 == 0 || subset.0 > SubsetKey::full(n).0 {
        return Err(Error::InvalidParam(format!(
            "subset mask {:#b} invalid for {n} drivers",
            subset.0
        )));
    }
    let y = design.block_points(subset).expect("non-empty subset");
    let z = subset.complement(n);
    let z_points = design.block_points(z);
    match params.cmi_mode {
        CmiMode::Direct => cmi_ksg(&design.target, &y, z_points.as_ref(), params),
        CmiMode::ChainRule => cmi_chain(&design.target, &y, z_points.as_ref(), params),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DecompositionOptions {
    pub driver_cap: usize,
    /// Worker count; None uses the global thread pool.
    pub threads: Option<usize>,
    /// Echoed into the result for provenance; not used in computation.
    pub seed: Option<u64>,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            driver_cap: DEFAULT_DRIVER_CAP,
            threads: None,
            seed: None,
        }
    }
}

/// Driver description echoed into results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverEcho {
    pub label: String,
    pub process: String,
    pub lags: Vec<usize>,
}

/// Diagnostics attached to a result: estimator warnings plus the optional
/// missing-process and confounder reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DiagnosticsReport {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub missing_process: Option<crate::diagnostics::MissingProcessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confounders: Option<Vec<crate::diagnostics::ConfounderFlag>>,
}

impl DiagnosticsReport {
    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty() && self.missing_process.is_none() && self.confounders.is_none()
    }
}

/// The serialized unit of output; see the README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub schema_version: u32,
    pub target: String,
    pub lead: usize,
    pub drivers: Vec<DriverEcho>,
    pub k: usize,
    pub cmi_mode: CmiMode,
    pub tail_cut: f64,
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub reference: ReferenceDensity,
    pub raw_cmi: BTreeMap<String, f64>,
    pub pure_mlinks: BTreeMap<String, f64>,
    pub totals: BTreeMap<String, f64>,
    pub i_full: f64,
    pub w_x: f64,
    pub w_total: f64,
    pub cs: BTreeMap<String, f64>,
    pub cs_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsReport>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl DecompositionResult {
    pub fn driver_labels(&self) -> Vec<String> {
        self.drivers.iter().map(|d| d.label.clone()).collect()
    }

    /// Rebuild the mlink table from the serialized maps.
    pub fn mlink_table(&self) -> Result<MlinkTable> {
        let labels = self.driver_labels();
        let n = labels.len();
        let len = (1usize << n) - 1;
        let mut raw = vec![f64::NAN; len];
        for mask in 1..=len as u32 {
            let key = SubsetKey(mask);
            let label = key.label(&labels);
            let v = self
                .raw_cmi
                .get(&label)
                .ok_or_else(|| Error::InvalidParam(format!("missing raw entry '{label}'")))?;
            raw[mask as usize - 1] = *v;
        }
        MlinkTable::from_raw(n, raw)
    }
}

/// Run the whole pipeline: design construction, rank transform, 2^N - 1
/// subset estimations, one self-certainty estimation, mlink extraction and
/// normalization.
pub fn full_decomposition(
    dataset: &Dataset,
    spec: &AnalysisSpec,
    opts: &DecompositionOptions,
) -> Result<DecompositionResult> {
    let n = spec.drivers.len();
    if n > opts.driver_cap {
        return Err(Error::TooManyDrivers {
            n,
            cap: opts.driver_cap,
        });
    }
    let design = build_design(dataset, spec)?;
    let transformed = TransformedDesign::new(&design, spec.tail_cut)?;

    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
            pool.install(|| decompose_on_design(&transformed, spec, opts))
        }
        None => decompose_on_design(&transformed, spec, opts),
    }
}

fn decompose_on_design(
    transformed: &TransformedDesign,
    spec: &AnalysisSpec,
    opts: &DecompositionOptions,
) -> Result<DecompositionResult> {
    let n = spec.drivers.len();
    let params = &spec.estimator;
    let n_subsets = (1usize << n) - 1;
    let full = SubsetKey::full(n);

    let raw: Vec<f64> = match params.cmi_mode {
        CmiMode::Direct => (1..=n_subsets as u32)
            .into_par_iter()
            .map(|mask| raw_cmi_for_subset(transformed, SubsetKey(mask), params))
            .collect::<Result<Vec<f64>>>()?,
        CmiMode::ChainRule => {
            // one KSG MI per non-empty subset; raw(S) = I(x; full) - I(x; S^c)
            let mi: Vec<f64> = (1..=n_subsets as u32)
                .into_par_iter()
                .map(|mask| {
                    let y = transformed.block_points(SubsetKey(mask)).expect("non-empty");
                    mi_ksg(&transformed.target, &y, params)
                })
                .collect::<Result<Vec<f64>>>()?;
            let i_full = mi[full.0 as usize - 1];
            (1..=n_subsets as u32)
                .map(|mask| {
                    let comp = SubsetKey(mask).complement(n);
                    if comp.0 == 0 {
                        i_full
                    } else {
                        i_full - mi[comp.0 as usize - 1]
                    }
                })
                .collect()
        }
    };

    let table = MlinkTable::from_raw(n, raw)?;
    let i_full = table.raw(full);
    let totals = driver_totals(table.pure_values(), n);

    let reference = fit_reference(&transformed.raw_target, spec.reference)?;
    let w_x = self_certainty(&transformed.raw_target, &reference, params)?;
    let (cs, cs_noise) = causal_strengths(&totals, i_full, w_x)?;
    let w_total = total_certainty(w_x, i_full);

    let labels = transformed.labels.clone();
    let mut raw_map = BTreeMap::new();
    let mut pure_map = BTreeMap::new();
    for key in table.keys() {
        let label = key.label(&labels);
        raw_map.insert(label.clone(), table.raw(key));
        pure_map.insert(label, table.pure(key));
    }
    let mut totals_map = BTreeMap::new();
    let mut cs_map = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        totals_map.insert(label.clone(), totals[i]);
        cs_map.insert(label.clone(), cs[i]);
    }

    let mut diagnostics = DiagnosticsReport::default();
    if w_x < NEGATIVE_W_WARN {
        diagnostics.warnings.push(format!(
            "self-certainty estimate {w_x:.4} is below {NEGATIVE_W_WARN}; \
             reported raw (not clamped)"
        ));
    }

    Ok(DecompositionResult {
        schema_version: SCHEMA_VERSION,
        target: spec.target.clone(),
        lead: spec.lead,
        drivers: spec
            .drivers
            .iter()
            .enumerate()
            .map(|(i, d)| DriverEcho {
                label: labels[i].clone(),
                process: d.process.clone(),
                lags: d.lags.clone(),
            })
            .collect(),
        k: params.k,
        cmi_mode: params.cmi_mode,
        tail_cut: spec.tail_cut,
        units: "nats".into(),
        seed: opts.seed,
        reference,
        raw_cmi: raw_map,
        pure_mlinks: pure_map,
        totals: totals_map,
        i_full,
        w_x,
        w_total,
        cs: cs_map,
        cs_noise,
        diagnostics: if diagnostics.is_empty() {
            None
        } else {
            Some(diagnostics)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_driver_pure_formula() {
        // raw = [I(x;y|z), I(x;z|y), I(x;y,z)]
        let raw = vec![0.4, 0.7, 1.5];
        let pure = pure_mlinks(&raw);
        assert_eq!(pure[0], 0.4);
        assert_eq!(pure[1], 0.7);
        assert!((pure[2] - (1.5 - 0.4 - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn moebius_inversion_oracle() {
        // pure(S) must equal the inclusion-exclusion sum
        // sum over non-empty T subseteq S of (-1)^(|S|-|T|) raw(T)
        let n = 4;
        let len = (1usize << n) - 1;
        let raw: Vec<f64> = (0..len).map(|i| ((i * 37 + 11) % 97) as f64 / 13.0).collect();
        let pure = pure_mlinks(&raw);
        for mask in 1..=len as u32 {
            let s = SubsetKey(mask);
            let mut expected = 0.0;
            let mut sub = mask;
            loop {
                let t = SubsetKey(sub);
                let sign = if (s.cardinality() - t.cardinality()) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                expected += sign * raw[sub as usize - 1];
                if sub == 0 || ((sub - 1) & mask) == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            assert!(
                (pure[mask as usize - 1] - expected).abs() < 1e-12,
                "mask {mask}: {} vs {expected}",
                pure[mask as usize - 1]
            );
        }
    }

    #[test]
    fn telescoping_and_allocation_identities() {
        for n in 1..=5usize {
            let len = (1usize << n) - 1;
            let raw: Vec<f64> = (0..len)
                .map(|i| ((i * 83 + n * 5 + 1) % 101) as f64 / 17.0 - 2.0)
                .collect();
            let pure = pure_mlinks(&raw);
            let i_full = raw[len - 1];
            let sum_pure: f64 = pure.iter().sum();
            assert!((sum_pure - i_full).abs() < 1e-12);
            let totals = driver_totals(&pure, n);
            let sum_totals: f64 = totals.iter().sum();
            assert!((sum_totals - i_full).abs() < 1e-12);
        }
    }

    #[test]
    fn totals_weighting_example() {
        // three drivers with the weights 1, 1/2, 1/3 applied per order
        let n = 3;
        // masks: 1:{0} 2:{1} 3:{0,1} 4:{2} 5:{0,2} 6:{1,2} 7:{0,1,2}
        let pure = vec![0.08, 0.059, 0.70, 0.021, 0.53, 0.15, -0.63];
        let totals = driver_totals(&pure, n);
        let expected0 = 0.08 + 0.5 * (0.70 + 0.53) + (1.0 / 3.0) * (-0.63);
        assert!((totals[0] - expected0).abs() < 1e-15);
        assert!((totals[0] - 0.485).abs() < 1e-12);
    }

    #[test]
    fn single_driver_total_is_mi() {
        let pure = vec![1.25];
        let totals = driver_totals(&pure, 1);
        assert_eq!(totals[0], 1.25);
    }

    #[test]
    fn strengths_sum_to_one() {
        let totals = vec![0.4, 0.9, 0.2];
        let i_full = totals.iter().sum::<f64>();
        let w = 0.3;
        let (cs, cs_noise) = causal_strengths(&totals, i_full, w).unwrap();
        let s: f64 = cs.iter().sum::<f64>() + cs_noise;
        assert!((s - 1.0).abs() < 1e-12);
        assert!(causal_strengths(&totals, -1.0, 0.5).is_err());
    }

    #[test]
    fn zero_information_gives_noise_one() {
        let (cs, cs_noise) = causal_strengths(&[0.0], 0.0, 0.42).unwrap();
        assert_eq!(cs[0], 0.0);
        assert_eq!(cs_noise, 1.0);
    }

    #[test]
    fn two_driver_ordering_matches_singleton_raws() {
        // sign(cs1 - cs2) == sign(raw({1}) - raw({2})) for any shared 2link
        for (r1, r2, r12) in [(0.2, 0.9, 1.5), (0.8, 0.1, 0.7), (0.5, 0.5, 2.0)] {
            let raw = vec![r1, r2, r12];
            let pure = pure_mlinks(&raw);
            let totals = driver_totals(&pure, 2);
            let d_tot = totals[0] - totals[1];
            let d_raw = r1 - r2;
            assert_eq!(d_tot.signum() * d_raw.signum() >= 0.0, true);
            assert!((d_tot - d_raw).abs() < 1e-12);
        }
    }

    #[test]
    fn subset_labels() {
        let labels = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        assert_eq!(SubsetKey(0b101).label(&labels), "x+z");
        assert_eq!(SubsetKey(0b010).label(&labels), "y");
        assert_eq!(SubsetKey(0b111).label(&labels), "x+y+z");
    }
}
