//! Run directory layout and artifact IO.
//!
//! Layout: `config.json` and `manifest.json` at the root, plus `splits/`,
//! `embeddings/`, `traces/` and `reports/`. All writes go through a
//! temp-file-and-rename so reruns overwrite atomically.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ddc_core::dataset::{Interaction, InteractionDataset};
use ddc_core::model::EmbeddingTable;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: PathBuf) -> Result<Self> {
        for sub in ["splits", "embeddings", "traces", "reports"] {
            std::fs::create_dir_all(root.join(sub))?;
        }
        Ok(Self { root })
    }

    pub fn open(root: PathBuf) -> Result<Self> {
        if !root.join("manifest.json").exists() {
            return Err(CliError::Data(format!(
                "{} is not a run directory (missing manifest.json); run `ingest` first",
                root.display()
            )));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let target = self.root.join(rel);
        let tmp = target.with_extension("tmp");
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, &target)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Data(format!("serialize {rel}: {e}")))?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn read_to_string(&self, rel: &str) -> Result<String> {
        std::fs::read_to_string(self.root.join(rel)).map_err(|e| {
            CliError::Data(format!(
                "missing upstream artifact {rel} in {}: {e}",
                self.root.display()
            ))
        })
    }

    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let text = self.read_to_string("config.json")?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("corrupt config.json: {e}")))
    }

    pub fn save_config(&self, cfg: &ExperimentConfig) -> Result<()> {
        self.write_json("config.json", cfg)
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        let text = self.read_to_string("manifest.json")?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("corrupt manifest.json: {e}")))
    }

    /// Persist a split dataset: manifest, three split TSVs with remapped
    /// integer ids, and the id mapping tables.
    pub fn save_dataset(&self, ds: &InteractionDataset, manifest: &Manifest) -> Result<()> {
        self.write_json("manifest.json", manifest)?;
        let dump = |items: &[Interaction]| {
            let mut out = String::new();
            for it in items {
                out.push_str(&format!("{}\t{}\n", it.user, it.item));
            }
            out
        };
        self.write("splits/train.tsv", dump(ds.train()).as_bytes())?;
        self.write("splits/valid.tsv", dump(ds.valid()).as_bytes())?;
        self.write("splits/test.tsv", dump(ds.test()).as_bytes())?;
        let map = |ids: &[String]| {
            let mut out = String::new();
            for (idx, raw) in ids.iter().enumerate() {
                out.push_str(&format!("{idx}\t{raw}\n"));
            }
            out
        };
        self.write("splits/user_ids.tsv", map(ds.user_ids()).as_bytes())?;
        self.write("splits/item_ids.tsv", map(ds.item_ids()).as_bytes())?;
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<InteractionDataset> {
        let user_ids = self.load_id_map("splits/user_ids.tsv")?;
        let item_ids = self.load_id_map("splits/item_ids.tsv")?;
        let train = self.load_split("splits/train.tsv")?;
        let valid = self.load_split("splits/valid.tsv")?;
        let test = self.load_split("splits/test.tsv")?;
        Ok(InteractionDataset::from_parts(
            user_ids, item_ids, train, valid, test,
        )?)
    }

    fn load_split(&self, rel: &str) -> Result<Vec<Interaction>> {
        let text = self.read_to_string(rel)?;
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse = |field: Option<&str>| -> Result<usize> {
                field.and_then(|f| f.parse().ok()).ok_or_else(|| {
                    CliError::Data(format!("{rel}:{}: malformed split line", lineno + 1))
                })
            };
            let mut fields = line.split('\t');
            out.push(Interaction::new(
                parse(fields.next())?,
                parse(fields.next())?,
            ));
        }
        Ok(out)
    }

    fn load_id_map(&self, rel: &str) -> Result<Vec<String>> {
        let text = self.read_to_string(rel)?;
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (idx, raw) = line.split_once('\t').ok_or_else(|| {
                CliError::Data(format!("{rel}:{}: malformed mapping line", lineno + 1))
            })?;
            if idx.parse::<usize>() != Ok(out.len()) {
                return Err(CliError::Data(format!(
                    "{rel}:{}: mapping indices must be dense and ascending",
                    lineno + 1
                )));
            }
            out.push(raw.to_string());
        }
        Ok(out)
    }

    pub fn save_embeddings(
        &self,
        rel: &str,
        table: &EmbeddingTable,
        backbone: &str,
        seed: u64,
    ) -> Result<()> {
        // save_embeddings in core writes directly; route through a temp name
        // for atomicity.
        let target = self.root.join(rel);
        let tmp = target.with_extension("tmp");
        ddc_core::model::save_embeddings(&tmp, table, backbone, seed)?;
        std::fs::rename(&tmp, &target)?;
        Ok(())
    }

    pub fn load_embeddings(
        &self,
        rel: &str,
    ) -> Result<(ddc_core::model::EmbeddingHeader, EmbeddingTable)> {
        let path = self.root.join(rel);
        if !path.exists() {
            return Err(CliError::Data(format!(
                "missing upstream artifact {rel} in {}; run the producing command first",
                self.root.display()
            )));
        }
        Ok(ddc_core::model::load_embeddings(&path)?)
    }

    /// Upsert one row into `reports/metrics.csv`, keyed by (run_id, split, K).
    pub fn upsert_metrics_row(&self, key: &str, row: &str) -> Result<()> {
        let rel = "reports/metrics.csv";
        let header = "run_id,split,K,recall,ndcg,mrr,map,avgpop,users";
        let mut lines: Vec<String> = match std::fs::read_to_string(self.root.join(rel)) {
            Ok(text) => text.lines().map(str::to_string).collect(),
            Err(_) => vec![header.to_string()],
        };
        // Exact key match on the first three fields; a bare prefix would
        // conflate K=10 with K=100.
        let prefix = format!("{key},");
        if let Some(existing) = lines.iter_mut().find(|l| l.starts_with(&prefix)) {
            *existing = row.to_string();
        } else {
            lines.push(row.to_string());
        }
        let mut out = lines.join("\n");
        out.push('\n');
        self.write(rel, out.as_bytes())
    }
}

/// Dataset provenance and counts; written by `ingest`, consumed everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub source: String,
    pub num_users: usize,
    pub num_items: usize,
    pub num_train: usize,
    pub num_valid: usize,
    pub num_test: usize,
    pub k_core: usize,
    pub ratios: [f64; 3],
    pub seed: u64,
    /// Users whose train history covers the whole catalog (skipped by the
    /// negative sampler).
    pub degenerate_users: usize,
}
