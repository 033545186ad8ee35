//! Pool-based active-learning experiments on top of `possal`: datasets,
//! synthetic generators, the query loop, summaries and the CLI plumbing.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod run;
pub mod summary;

pub use config::ExperimentConfig;
pub use dataset::{load_csv, Dataset};
pub use error::{HarnessError, Result};
pub use run::{run_active_learning, RunRecord, RunSettings};
