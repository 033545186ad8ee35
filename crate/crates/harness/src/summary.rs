use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::run::RunRecord;

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(q1, median, q3)` of an unsorted sample.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75))
}

/// 1-based ranks, best (largest) first, ties sharing the mean rank.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub acquisition: String,
    pub n_ok: usize,
    pub n_failed: usize,
    pub final_median: f64,
    pub final_q1: f64,
    pub final_q3: f64,
    pub auc_median: f64,
    pub auc_q1: f64,
    pub auc_q3: f64,
    /// Rank among the acquisitions on this dataset.
    pub final_rank: f64,
    pub auc_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageRank {
    pub acquisition: String,
    pub n_datasets: usize,
    pub final_rank: f64,
    pub auc_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub average_ranks: Vec<AverageRank>,
}

/// `records[dataset][acquisition]` holds the runs of one configuration.
pub type RecordSet = BTreeMap<String, BTreeMap<String, Vec<RunRecord>>>;

pub fn summarize(records: &RecordSet) -> Result<SummaryTable> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords("no datasets".into()));
    }
    let mut rows = Vec::new();
    for (dataset, by_acq) in records {
        let start = rows.len();
        for (acq, runs) in by_acq {
            let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.is_ok()).collect();
            let failed = runs.len() - ok.len();
            if ok.len() < 2 {
                return Err(HarnessError::EmptyRecords(format!(
                    "{dataset}/{acq}: {} successful run(s), need at least 2",
                    ok.len()
                )));
            }
            let finals: Vec<f64> = ok.iter().filter_map(|r| r.final_accuracy()).collect();
            let aucs: Vec<f64> = ok.iter().filter_map(|r| r.auc()).collect();
            let (fq1, fmed, fq3) = quartiles(&finals);
            let (aq1, amed, aq3) = quartiles(&aucs);
            rows.push(SummaryRow {
                dataset: dataset.clone(),
                acquisition: acq.clone(),
                n_ok: ok.len(),
                n_failed: failed,
                final_median: fmed,
                final_q1: fq1,
                final_q3: fq3,
                auc_median: amed,
                auc_q1: aq1,
                auc_q3: aq3,
                final_rank: 0.0,
                auc_rank: 0.0,
            });
        }
        let block = &mut rows[start..];
        let fr = fractional_ranks(&block.iter().map(|r| r.final_median).collect::<Vec<_>>());
        let ar = fractional_ranks(&block.iter().map(|r| r.auc_median).collect::<Vec<_>>());
        for (row, (f, a)) in block.iter_mut().zip(fr.into_iter().zip(ar)) {
            row.final_rank = f;
            row.auc_rank = a;
        }
    }
    let mut acc: BTreeMap<&str, (usize, f64, f64)> = BTreeMap::new();
    for row in &rows {
        let e = acc.entry(&row.acquisition).or_default();
        e.0 += 1;
        e.1 += row.final_rank;
        e.2 += row.auc_rank;
    }
    let average_ranks = acc
        .into_iter()
        .map(|(acq, (n, f, a))| AverageRank {
            acquisition: acq.to_string(),
            n_datasets: n,
            final_rank: f / n as f64,
            auc_rank: a / n as f64,
        })
        .collect();
    Ok(SummaryTable { rows, average_ranks })
}

/// Per-step accuracy quartiles of one dataset, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub step: usize,
    pub acquisition: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

pub fn plot_rows(by_acq: &BTreeMap<String, Vec<RunRecord>>) -> Vec<PlotRow> {
    let mut out = Vec::new();
    for (acq, runs) in by_acq {
        let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.is_ok()).collect();
        let steps = ok.iter().map(|r| r.accuracy.len()).min().unwrap_or(0);
        for step in 0..steps {
            let vals: Vec<f64> = ok.iter().map(|r| r.accuracy[step]).collect();
            let (q1, median, q3) = quartiles(&vals);
            out.push(PlotRow { step, acquisition: acq.clone(), median, q1, q3 });
        }
    }
    out
}

pub fn write_csv<R: Serialize>(rows: &[R], path: &Path) -> Result<()> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(crate::error::io_err(path))?;
    Ok(())
}
