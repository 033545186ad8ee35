use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{read_results_dir, run_experiment, write_results};
use crate::generate::{gen_blobs, gen_block, BlobGeometry, BlockGeometry, BlockVariant};
use crate::summary::{plot_rows, summarize, write_csv};

#[derive(Debug, Parser)]
#[command(name = "possal", version, about = "Possibilistic active-learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured acquisition and write JSON-lines results.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Summarize a results directory into `summary.csv` and `ranks.csv`.
    Summarize {
        #[arg(long)]
        results: PathBuf,
        /// Defaults to the results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset as CSV.
    GenData {
        #[arg(long, value_enum)]
        kind: DataKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-step accuracy quartiles of one dataset as CSV.
    ExportPlot {
        #[arg(long)]
        results: PathBuf,
        /// Required when the directory holds several datasets.
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    BlockCenter,
    BlockCorner,
    Blobs,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let dataset = cfg.load_dataset()?;
            let results = run_experiment(&cfg, &dataset)?;
            for (acq, runs) in &results {
                let failed = runs.iter().filter(|r| !r.is_ok()).count();
                if failed > 0 {
                    log::warn!("{acq}: {failed} of {} runs failed", runs.len());
                }
            }
            for p in write_results(&out, &cfg.name, &results)? {
                println!("{}", p.display());
            }
        }
        Command::Summarize { results, out } => {
            let set = read_results_dir(&results)?;
            let table = summarize(&set)?;
            let dir = out.unwrap_or(results);
            std::fs::create_dir_all(&dir).map_err(crate::error::io_err(&dir))?;
            write_csv(&table.rows, &dir.join("summary.csv"))?;
            write_csv(&table.average_ranks, &dir.join("ranks.csv"))?;
            println!(
                "{:<16} {:<18} {:>7} {:>7} {:>7} {:>7} {:>6}",
                "dataset", "acquisition", "median", "q1", "q3", "auc", "rank"
            );
            for r in &table.rows {
                println!(
                    "{:<16} {:<18} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>6.2}",
                    r.dataset, r.acquisition, r.final_median, r.final_q1, r.final_q3, r.auc_median, r.final_rank
                );
            }
        }
        Command::GenData { kind, seed, out } => {
            let ds = match kind {
                DataKind::BlockCenter => gen_block(BlockVariant::Center, &BlockGeometry::default(), seed)?,
                DataKind::BlockCorner => gen_block(BlockVariant::Corner, &BlockGeometry::default(), seed)?,
                DataKind::Blobs => gen_blobs(&BlobGeometry::default(), seed)?,
            };
            ds.write_csv(&out)?;
        }
        Command::ExportPlot { results, dataset, out } => {
            let mut set = read_results_dir(&results)?;
            let by_acq = match dataset {
                Some(name) => set
                    .remove(&name)
                    .ok_or_else(|| HarnessError::EmptyRecords(format!("no results for dataset `{name}`")))?,
                None if set.len() == 1 => set.into_values().next().expect("one dataset"),
                None => {
                    return Err(HarnessError::Config(format!(
                        "several datasets in {}; pass --dataset",
                        results.display()
                    )))
                }
            };
            write_csv(&plot_rows(&by_acq), &out)?;
        }
    }
    Ok(())
}
