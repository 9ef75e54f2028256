//! CSV ingestion/emission and result (de)serialization.
//!
//! CSV: header row of unique names, numeric body, '.' decimal, rectangular.
//! Results: schema-versioned JSON with stable key ordering, so exports are
//! deterministic byte streams for fixed inputs.

use crate::decomposition::{DecompositionResult, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::{Dataset, ProcessSeries};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

/// Read a dataset from CSV: one series per column, row order = time order.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::CsvFormat {
            path: path_str.clone(),
            row: 1,
            col: "-".into(),
            msg: e.to_string(),
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.is_empty() {
        return Err(Error::CsvFormat {
            path: path_str,
            row: 1,
            col: "-".into(),
            msg: "empty header row".into(),
        });
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(Error::CsvFormat {
                path: path_str,
                row: 1,
                col: h.clone(),
                msg: "duplicate header".into(),
            });
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::CsvFormat {
            path: path_str.clone(),
            row,
            col: "-".into(),
            msg: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::CsvFormat {
                path: path_str,
                row,
                col: "-".into(),
                msg: format!(
                    "ragged row: {} fields, expected {}",
                    record.len(),
                    headers.len()
                ),
            });
        }
        for (ci, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::CsvFormat {
                path: path_str.clone(),
                row,
                col: headers[ci].clone(),
                msg: format!("non-numeric cell '{field}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::CsvFormat {
                    path: path_str,
                    row,
                    col: headers[ci].clone(),
                    msg: format!("non-finite cell '{field}'"),
                });
            }
            columns[ci].push(v);
        }
    }

    let series: Result<Vec<ProcessSeries>> = headers
        .into_iter()
        .zip(columns)
        .map(|(name, vals)| ProcessSeries::new(name, vals))
        .collect();
    Dataset::new(series?)
}

/// Write a dataset as CSV. Values use the shortest representation that
/// round-trips exactly, so read_csv(write_csv(ds)) is lossless.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let names: Vec<&str> = dataset.series().iter().map(|s| s.name.as_str()).collect();
    writeln!(w, "{}", names.join(","))?;
    for i in 0..dataset.len() {
        let row: Vec<String> = dataset
            .series()
            .iter()
            .map(|s| format!("{}", s.values[i]))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Serialize a result to pretty JSON with stable key order.
pub fn result_to_json(result: &DecompositionResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

pub fn write_result(result: &DecompositionResult, path: impl AsRef<Path>) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(result_to_json(result)?.as_bytes())?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

pub fn read_result(path: impl AsRef<Path>) -> Result<DecompositionResult> {
    let text = std::fs::read_to_string(path)?;
    // check the schema marker before strict decoding so the error names it
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: v.to_string(),
            })
        }
        None => {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: "missing".into(),
            })
        }
    }
    Ok(serde_json::from_value(value)?)
}
