//! CSV ingestion for observation matrices and labelled datasets.

use std::io::Read;

use log::warn;

use crate::discriminant::LabeledDataset;
use crate::error::{MmError, Result};

/// Reads rows of numbers. A first row containing any non-numeric field is
/// taken as a header and skipped.
pub fn read_numeric_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let record = record.map_err(|e| MmError::Parse(e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(MmError::Parse(format!(
                    "row {}: {e} in {:?}",
                    idx + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(MmError::Parse("no numeric rows".into()));
    }
    let width = rows[0].len();
    if let Some(pos) = rows.iter().position(|r| r.len() != width) {
        return Err(MmError::Parse(format!(
            "row {} has {} fields, expected {width}",
            pos + 1,
            rows[pos].len()
        )));
    }
    Ok(rows)
}

/// Centres each column and scales it to unit sample standard deviation.
/// Constant columns are only centred.
pub fn standardize(rows: &mut [Vec<f64>]) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let p = rows[0].len();
    for j in 0..p {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        let scale = if sd > 0.0 {
            sd
        } else {
            warn!("feature column {j} is constant; centring only");
            1.0
        };
        for r in rows.iter_mut() {
            r[j] = (r[j] - mean) / scale;
        }
    }
}

/// Reads features with the class label in the last column.
pub fn read_labeled<R: Read>(reader: R, standardize_features: bool) -> Result<LabeledDataset> {
    let rows = read_numeric_rows(reader)?;
    if rows[0].len() < 2 {
        return Err(MmError::Parse(
            "need at least one feature column and a label column".into(),
        ));
    }
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (i, mut row) in rows.into_iter().enumerate() {
        let label = row.pop().expect("row has a label column");
        if label.fract() != 0.0 || label.abs() > 1e15 {
            return Err(MmError::Parse(format!(
                "row {}: label {label} is not an integer",
                i + 1
            )));
        }
        labels.push(label as i64);
        features.push(row);
    }
    if standardize_features {
        standardize(&mut features);
    }
    LabeledDataset::from_rows(&features, labels)
}
