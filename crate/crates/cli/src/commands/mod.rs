//! Subcommand implementations and shared plumbing.

pub mod ablate;
pub mod evaluate;
pub mod finetune;
pub mod geometry;
pub mod ingest;
pub mod sweep;
pub mod train;

pub use ablate::run as ablate;
pub use evaluate::run as evaluate;
pub use finetune::run as finetune;
pub use geometry::run as geometry;
pub use ingest::run as ingest;
pub use sweep::run as sweep_k;
pub use train::run as train;

use std::path::PathBuf;

use clap::Args;

use crate::config::{load_config, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::rundir::RunDir;

pub const OUT_ROOT_ENV: &str = "DDC_OUT_ROOT";

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config JSON (downstream commands default to the run
    /// directory's persisted config).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override a config value, e.g. --set train.learning_rate=0.01.
    /// Repeatable; applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Run directory; overrides config.output_dir and $DDC_OUT_ROOT.
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
}

impl CommonArgs {
    /// Resolve the run directory for a fresh run (ingest).
    pub fn resolve_new_run_dir(&self, cfg: &ExperimentConfig) -> Result<PathBuf> {
        if let Some(dir) = &self.run_dir {
            return Ok(dir.clone());
        }
        if let Some(dir) = &cfg.output_dir {
            return Ok(dir.clone());
        }
        match std::env::var(OUT_ROOT_ENV) {
            Ok(root) => {
                let id = cfg.run_id.clone().unwrap_or_else(|| "run".to_string());
                Ok(PathBuf::from(root).join(id))
            }
            Err(_) => Err(CliError::Usage(format!(
                "no run directory: pass --run-dir, set output_dir in the config, or export {OUT_ROOT_ENV}"
            ))),
        }
    }

    /// Open an existing run directory and resolve its effective config
    /// (explicit --config wins over the persisted one; --set applies last).
    pub fn open_run(&self) -> Result<(RunDir, ExperimentConfig)> {
        let dir = match &self.run_dir {
            Some(dir) => dir.clone(),
            None => {
                // Fall back to the config file's output_dir or the env root.
                let cfg = load_config(self.config.as_deref(), &self.set)?;
                self.resolve_new_run_dir(&cfg)?
            }
        };
        let run = RunDir::open(dir)?;
        let cfg = match &self.config {
            Some(path) => load_config(Some(path), &self.set)?,
            None => {
                let persisted = run.load_config()?;
                if self.set.is_empty() {
                    persisted
                } else {
                    let value = serde_json::to_value(&persisted)
                        .map_err(|e| CliError::Data(e.to_string()))?;
                    crate::config::apply_overrides(value, &self.set)?
                }
            }
        };
        // Keep the run directory self-describing.
        run.save_config(&cfg)?;
        Ok((run, cfg))
    }
}

/// Every command echoes the resolved config it ran with.
pub fn echo_config(cfg: &ExperimentConfig) {
    match serde_json::to_string_pretty(cfg) {
        Ok(text) => println!("resolved config:\n{text}"),
        Err(_) => println!("resolved config: <unserializable>"),
    }
}
