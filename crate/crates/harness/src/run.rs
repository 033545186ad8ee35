use nalgebra::DMatrix;
use possal::acquisition::{select, Acquisition, AcquisitionRequest};
use possal::pgp::{predict_prob_averaged, predict_prob_mode, Link, NewtonOptions};
use possal::{BinaryClassifierModel, LatentPosterior, MulticlassClassifierModel, RbfKernel};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

const STREAM_RUN_SEEDS: u64 = 0;
const STREAM_SUBSET: u64 = 1;
const STREAM_HOT_START: u64 = 2;
const STREAM_ACQUISITION: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-run seeds; the `i`-th seed does not depend on how many are drawn.
pub fn run_seeds(master_seed: u64, n_runs: usize) -> Vec<u64> {
    let mut rng = stream(master_seed, STREAM_RUN_SEEDS);
    (0..n_runs).map(|_| rng.next_u64()).collect()
}

/// Settings of a single active-learning run.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub n_queries: usize,
    pub train_pool_size: usize,
    pub test_size: usize,
    pub kernel: RbfKernel,
    pub link: Link,
}

/// Outcome of one run. `accuracy[k]` is the test accuracy after `k`
/// queries; `queried[k]` is the dataset row queried at step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub run_seed: u64,
    pub queried: Vec<usize>,
    pub accuracy: Vec<f64>,
    /// Dataset rows labeled at the end of the run, hot start first.
    pub labeled: Vec<usize>,
    pub fits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.failed.is_none()
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.accuracy.last().copied()
    }

    /// Mean of the per-step accuracy sequence.
    pub fn auc(&self) -> Option<f64> {
        if self.accuracy.is_empty() {
            None
        } else {
            Some(self.accuracy.iter().sum::<f64>() / self.accuracy.len() as f64)
        }
    }
}

/// A fitted binary or multiclass model.
pub enum Fitted {
    Binary(BinaryClassifierModel),
    Multi(MulticlassClassifierModel),
}

impl Fitted {
    pub fn fit(dataset: &Dataset, rows: &[usize], kernel: RbfKernel, link: Link) -> possal::Result<Self> {
        let x = dataset.rows(rows);
        if dataset.n_classes() == 2 {
            let y: Vec<i8> = rows.iter().map(|&i| if dataset.labels[i] == 1 { 1 } else { -1 }).collect();
            BinaryClassifierModel::fit(x, &y, kernel, link, NewtonOptions::binary()).map(Fitted::Binary)
        } else {
            let y: Vec<usize> = rows.iter().map(|&i| dataset.labels[i]).collect();
            MulticlassClassifierModel::fit_shared(x, &y, dataset.n_classes(), kernel, NewtonOptions::multiclass())
                .map(Fitted::Multi)
        }
    }

    pub fn posterior(&self, x: &DMatrix<f64>) -> possal::Result<LatentPosterior> {
        match self {
            Fitted::Binary(m) => m.classify(x),
            Fitted::Multi(m) => m.classify(x),
        }
    }
}

/// Fraction of rows whose most probable class (lowest index on ties)
/// matches the label.
pub fn accuracy(probs: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let hits = probs
        .row_iter()
        .zip(labels)
        .filter(|(row, &l)| {
            let best = row.iter().enumerate().fold(0, |b, (j, &p)| if p > row[b] { j } else { b });
            best == l
        })
        .count();
    hits as f64 / labels.len() as f64
}

/// One pool-based active-learning run.
///
/// The pool and the disjoint test split are drawn from the dataset, one
/// random pool point per class is labeled, then `n_queries` times the model
/// is refitted, the pool scored and the best point labeled. Test accuracy
/// is recorded after every fit.
pub fn run_active_learning(
    settings: &RunSettings,
    dataset: &Dataset,
    acquisition: Acquisition,
    run: usize,
    run_seed: u64,
) -> RunRecord {
    let mut record = RunRecord {
        run,
        run_seed,
        queried: Vec::with_capacity(settings.n_queries),
        accuracy: Vec::with_capacity(settings.n_queries + 1),
        labeled: Vec::new(),
        fits: 0,
        failed: None,
    };
    if let Err(reason) = run_inner(settings, dataset, acquisition, run_seed, &mut record) {
        log::warn!("run {run} ({acquisition}) failed: {reason}");
        record.failed = Some(reason);
    }
    record
}

fn run_inner(
    s: &RunSettings,
    dataset: &Dataset,
    acquisition: Acquisition,
    run_seed: u64,
    record: &mut RunRecord,
) -> Result<(), String> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut stream(run_seed, STREAM_SUBSET));
    let mut pool: Vec<usize> = order[..s.train_pool_size].to_vec();
    let test: Vec<usize> = order[s.train_pool_size..s.train_pool_size + s.test_size].to_vec();
    let test_x = dataset.rows(&test);
    let test_y: Vec<usize> = test.iter().map(|&i| dataset.labels[i]).collect();

    let mut hot = stream(run_seed, STREAM_HOT_START);
    let mut labeled = Vec::with_capacity(dataset.n_classes() + s.n_queries);
    for class in 0..dataset.n_classes() {
        let members: Vec<usize> = (0..pool.len()).filter(|&k| dataset.labels[pool[k]] == class).collect();
        if members.is_empty() {
            return Err(format!("class `{}` absent from the pool", dataset.label_names[class]));
        }
        let k = members[hot.random_range(0..members.len())];
        labeled.push(pool.remove(k));
    }
    record.labeled.clone_from(&labeled);

    let mut acq_rng = stream(run_seed, STREAM_ACQUISITION);
    for step in 0..=s.n_queries {
        let model = Fitted::fit(dataset, &labeled, s.kernel, s.link).map_err(|e| format!("fit at step {step}: {e}"))?;
        record.fits += 1;
        let test_post = model.posterior(&test_x).map_err(|e| e.to_string())?;
        record.accuracy.push(accuracy(&predict_prob_mode(&test_post, s.link), &test_y));
        if step == s.n_queries {
            break;
        }
        let step_seed = acq_rng.next_u64();
        let pool_post = model.posterior(&dataset.rows(&pool)).map_err(|e| e.to_string())?;
        let probs = if acquisition.uses_averaged_probs() {
            predict_prob_averaged(&pool_post, s.link, step_seed)
        } else {
            predict_prob_mode(&pool_post, s.link)
        };
        let req = AcquisitionRequest::new(&pool_post, &probs, s.link, step_seed).map_err(|e| e.to_string())?;
        let k = select(acquisition, &req).map_err(|e| format!("acquisition at step {step}: {e}"))?;
        let chosen = pool.remove(k);
        record.queried.push(chosen);
        labeled.push(chosen);
        record.labeled.push(chosen);
    }
    Ok(())
}
