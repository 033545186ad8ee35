use std::path::{Path, PathBuf};

use possal::acquisition::Acquisition;
use possal::pgp::Link;
use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, Dataset};
use crate::error::{io_err, HarnessError, Result};
use crate::generate::{gen_blobs, gen_block, BlobGeometry, BlockGeometry, BlockVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Relative paths are resolved against the config file's directory.
    Csv { path: PathBuf },
    Block {
        variant: BlockVariant,
        #[serde(default)]
        geometry: BlockGeometry,
        /// Defaults to the master seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    Blobs {
        #[serde(default)]
        geometry: BlobGeometry,
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub lengthscale: f64,
    #[serde(default = "one")]
    pub signal_variance: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset name used in result file names and summaries.
    pub name: String,
    pub dataset: DatasetSpec,
    pub acquisitions: Vec<Acquisition>,
    pub n_runs: usize,
    pub n_queries: usize,
    pub train_pool_size: usize,
    pub test_size: usize,
    pub kernel: KernelConfig,
    /// Candidate lengthscales; when present the one with the highest
    /// marginal likelihood on the full dataset replaces `kernel.lengthscale`.
    #[serde(default)]
    pub lengthscale_search: Option<Vec<f64>>,
    #[serde(default)]
    pub link: Link,
    pub master_seed: u64,
    /// Parallel runs; all cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|source| HarnessError::Json { context: path.display().to_string(), source })?;
        if let DatasetSpec::Csv { path: p } = &mut cfg.dataset {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Materializes the dataset this config points at.
    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetSpec::Csv { path } => load_csv(path),
            DatasetSpec::Block { variant, geometry, seed } => {
                gen_block(*variant, geometry, seed.unwrap_or(self.master_seed))
            }
            DatasetSpec::Blobs { geometry, seed } => gen_blobs(geometry, seed.unwrap_or(self.master_seed)),
        }
    }

    /// Checks sizes against the dataset.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.acquisitions.is_empty() {
            return bad("no acquisitions listed".into());
        }
        if self.n_runs == 0 {
            return bad("n_runs must be positive".into());
        }
        if self.train_pool_size + self.test_size > dataset.len() {
            return bad(format!(
                "train_pool_size + test_size = {} exceeds the {} available points",
                self.train_pool_size + self.test_size,
                dataset.len()
            ));
        }
        if self.n_queries >= self.train_pool_size {
            return bad("n_queries must be smaller than train_pool_size".into());
        }
        if self.n_queries + dataset.n_classes() > self.train_pool_size {
            return bad("pool too small for the hot start plus all queries".into());
        }
        let counts = dataset.class_counts();
        if let Some(c) = counts.iter().position(|&n| n < 2) {
            return bad(format!(
                "class `{}` has {} point(s); the hot start and the test split need at least 2",
                dataset.label_names[c], counts[c]
            ));
        }
        if self.test_size == 0 {
            return bad("test_size must be positive".into());
        }
        if !(self.kernel.lengthscale > 0.0 && self.kernel.signal_variance > 0.0) {
            return bad("kernel hyperparameters must be positive".into());
        }
        Ok(())
    }
}
