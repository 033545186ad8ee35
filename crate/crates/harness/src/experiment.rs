use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use possal::acquisition::Acquisition;
use possal::pgp::select_lengthscale;
use possal::RbfKernel;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::{io_err, HarnessError, Result};
use crate::run::{run_active_learning, run_seeds, RunRecord, RunSettings};
use crate::summary::RecordSet;

/// Separates dataset and acquisition in result file names.
const NAME_SEP: &str = "__";

pub fn results_path(dir: &Path, dataset: &str, acquisition: Acquisition) -> PathBuf {
    dir.join(format!("{dataset}{NAME_SEP}{acquisition}.jsonl"))
}

/// Resolves the kernel, running the optional lengthscale search.
pub fn resolve_kernel(config: &ExperimentConfig, dataset: &Dataset) -> Result<RbfKernel> {
    let mut lengthscale = config.kernel.lengthscale;
    if let Some(candidates) = &config.lengthscale_search {
        let s = select_lengthscale(
            &dataset.features,
            &dataset.labels,
            dataset.n_classes(),
            candidates,
            config.kernel.signal_variance,
            config.link,
        )?;
        log::info!("selected lengthscale {} (log evidence {:.4})", s.lengthscale, s.log_marginal_likelihood);
        lengthscale = s.lengthscale;
    }
    Ok(RbfKernel::new(lengthscale, config.kernel.signal_variance)?)
}

/// Every run of every acquisition, grouped by acquisition and sorted by run.
pub fn run_experiment(config: &ExperimentConfig, dataset: &Dataset) -> Result<BTreeMap<Acquisition, Vec<RunRecord>>> {
    config.validate(dataset)?;
    let settings = RunSettings {
        n_queries: config.n_queries,
        train_pool_size: config.train_pool_size,
        test_size: config.test_size,
        kernel: resolve_kernel(config, dataset)?,
        link: config.link,
    };
    let seeds = run_seeds(config.master_seed, config.n_runs);
    let jobs: Vec<(Acquisition, usize)> =
        config.acquisitions.iter().flat_map(|&a| (0..config.n_runs).map(move |r| (a, r))).collect();
    let work = || -> Vec<(Acquisition, RunRecord)> {
        jobs.par_iter().map(|&(a, r)| (a, run_active_learning(&settings, dataset, a, r, seeds[r]))).collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut grouped: BTreeMap<Acquisition, Vec<RunRecord>> = BTreeMap::new();
    for (a, rec) in results {
        grouped.entry(a).or_default().push(rec);
    }
    for runs in grouped.values_mut() {
        runs.sort_by_key(|r| r.run);
    }
    Ok(grouped)
}

/// Writes one JSON-lines file per acquisition.
pub fn write_results(
    dir: &Path,
    dataset: &str,
    results: &BTreeMap<Acquisition, Vec<RunRecord>>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (&acq, runs) in results {
        let path = results_path(dir, dataset, acq);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        for r in runs {
            let line = serde_json::to_string(r)
                .map_err(|source| HarnessError::Json { context: path.display().to_string(), source })?;
            writeln!(w, "{line}").map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|source| HarnessError::Json { context: format!("{}:{}", path.display(), i + 1), source })?;
        out.push(rec);
    }
    Ok(out)
}

/// Loads every `<dataset>__<acquisition>.jsonl` file in `dir`.
pub fn read_results_dir(dir: &Path) -> Result<RecordSet> {
    let mut set = RecordSet::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some((dataset, acq)) = stem.rsplit_once(NAME_SEP) else {
            log::warn!("skipping {}: name is not <dataset>{NAME_SEP}<acquisition>", path.display());
            continue;
        };
        set.entry(dataset.to_string()).or_default().insert(acq.to_string(), read_records(&path)?);
    }
    if set.is_empty() {
        return Err(HarnessError::EmptyRecords(format!("no result files in {}", dir.display())));
    }
    Ok(set)
}
