use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{HarnessError, Result};

/// Labeled feature matrix, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    /// Checks shape, finiteness and that every named class occurs.
    pub fn new(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        label_names: Vec<String>,
        provenance: String,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(HarnessError::Dataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(HarnessError::Dataset(format!("non-finite feature at flat index {i}")));
        }
        if label_names.len() < 2 {
            return Err(HarnessError::Dataset("at least two classes are required".into()));
        }
        let counts = class_counts(&labels, label_names.len())?;
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(HarnessError::Dataset(format!("class `{}` has no points", label_names[c])));
        }
        Ok(Self { features, labels, label_names, provenance })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.n_classes()).expect("labels validated at construction")
    }

    /// Rows at `idx`, in order.
    pub fn rows(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), self.dim(), |i, j| self.features[(idx[i], j)])
    }

    /// Writes the header `x0,..,x{d-1},label` followed by one row per point.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.features.row(i).iter().map(|v| format!("{v:?}")).collect();
            row.push(self.label_names[self.labels[i]].clone());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(crate::error::io_err(path))?;
        Ok(())
    }
}

fn class_counts(labels: &[usize], n_classes: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        *counts.get_mut(l).ok_or_else(|| HarnessError::Dataset(format!("label index {l} out of range")))? += 1;
    }
    Ok(counts)
}

/// Reads a CSV with a header row, numeric feature columns and the label in
/// the last column. Features are standardized per column; labels are
/// numbered in order of first appearance.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut reader =
        csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let n_cols = reader.headers().map_err(csv_err)?.len();
    if n_cols < 2 {
        return Err(HarnessError::Parse { row: 1, column: 1, message: "need at least one feature and a label".into() });
    }
    let d = n_cols - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (r, rec) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != n_cols {
            return Err(HarnessError::Parse {
                row: line,
                column: rec.len() + 1,
                message: format!("expected {n_cols} fields, found {}", rec.len()),
            });
        }
        for (c, field) in rec.iter().take(d).enumerate() {
            if field.is_empty() {
                return Err(HarnessError::Parse { row: line, column: c + 1, message: "missing value".into() });
            }
            let v: f64 = field.parse().map_err(|_| HarnessError::Parse {
                row: line,
                column: c + 1,
                message: format!("non-numeric feature `{field}`"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse { row: line, column: c + 1, message: "non-finite feature".into() });
            }
            values.push(v);
        }
        let label = &rec[d];
        if label.is_empty() {
            return Err(HarnessError::Parse { row: line, column: n_cols, message: "missing label".into() });
        }
        let next = names.len();
        let id = *index.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            next
        });
        labels.push(id);
    }
    if names.len() < 2 {
        return Err(HarnessError::Dataset(format!("{}: only one class present", path.display())));
    }
    let mut features = DMatrix::from_row_slice(labels.len(), d, &values);
    standardize(&mut features);
    Dataset::new(features, labels, names, format!("csv:{}", path.display()))
}

/// Zero mean, unit population variance per column; constant columns become 0.
pub fn standardize(x: &mut DMatrix<f64>) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for v in col.iter_mut() {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
}
