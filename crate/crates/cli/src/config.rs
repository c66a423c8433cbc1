//! Declarative experiment configuration: one JSON document, command-line
//! overrides via `--set key=value`, precedence CLI > file > defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ddc_core::dataset::{SplitRatios, SyntheticConfig};
use ddc_core::ddc::{FinetuneConfig, UpdateRule};
use ddc_core::model::{BackboneConfig, BackboneKind};
use ddc_core::trainer::{OptimizerKind, TrainConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run_id: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetSection,
    pub backbone: BackboneSection,
    pub train: TrainSection,
    pub geometry: GeometrySection,
    pub ddc: DdcSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub source: Option<SourceSection>,
    pub k_core: usize,
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            source: None,
            k_core: 10,
            ratios: [0.8, 0.1, 0.1],
            seed: 7,
        }
    }
}

impl DatasetSection {
    pub fn split_ratios(&self) -> Result<SplitRatios> {
        Ok(SplitRatios::new(
            self.ratios[0],
            self.ratios[1],
            self.ratios[2],
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSection {
    /// UTF-8 TSV file of `user<TAB>item` lines.
    Path(PathBuf),
    Synthetic(SyntheticSection),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub users: usize,
    pub items: usize,
    pub zipf: f64,
    pub per_user: usize,
    pub niche_fraction: f64,
    pub num_clusters: usize,
    pub pool_width: Option<usize>,
    pub zipf_offset: f64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        Self {
            users: 500,
            items: 300,
            zipf: 1.2,
            per_user: 40,
            niche_fraction: 0.35,
            num_clusters: 21,
            pool_width: None,
            zipf_offset: 10.0,
        }
    }
}

impl SyntheticSection {
    pub fn to_core(&self, seed: u64) -> SyntheticConfig {
        let mut cfg = SyntheticConfig::new(self.users, self.items, self.zipf, self.per_user, seed);
        cfg.niche_fraction = self.niche_fraction;
        cfg.num_clusters = self.num_clusters;
        cfg.pool_width = self.pool_width.unwrap_or(self.num_clusters);
        cfg.zipf_offset = self.zipf_offset;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackboneSection {
    pub kind: String,
    pub layers: usize,
    pub layer_weights: Option<Vec<f64>>,
}

impl Default for BackboneSection {
    fn default() -> Self {
        Self {
            kind: "mf".into(),
            layers: 2,
            layer_weights: None,
        }
    }
}

impl BackboneSection {
    pub fn to_core(&self) -> Result<BackboneConfig> {
        let kind = BackboneKind::parse(&self.kind)?;
        let cfg = BackboneConfig {
            kind,
            num_layers: self.layers,
            layer_weights: self.layer_weights.clone(),
        };
        cfg.resolved_weights()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: Option<usize>,
    pub seed: u64,
    pub optimizer: String,
    pub dim: usize,
    pub init_scale: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            learning_rate: d.learning_rate,
            l2_lambda: d.l2_lambda,
            batch_size: d.batch_size,
            patience: d.patience,
            max_epochs: d.max_epochs,
            seed: 11,
            optimizer: "adam".into(),
            dim: d.dim,
            init_scale: d.init_scale,
        }
    }
}

fn parse_optimizer(name: &str) -> Result<OptimizerKind> {
    match name {
        "adam" => Ok(OptimizerKind::adam_default()),
        "sgd" => Ok(OptimizerKind::Sgd),
        other => Err(CliError::Usage(format!(
            "unknown optimizer {other:?} (adam or sgd)"
        ))),
    }
}

impl TrainSection {
    pub fn to_core(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            learning_rate: self.learning_rate,
            l2_lambda: self.l2_lambda,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed: self.seed,
            optimizer: parse_optimizer(&self.optimizer)?,
            dim: self.dim,
            init_scale: self.init_scale,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub rho: f64,
    pub alignment_pairs: usize,
    pub alignment_seed: u64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            rho: 0.05,
            alignment_pairs: 200,
            alignment_seed: 17,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdcSection {
    /// Fraction of the history used for the preference direction.
    pub k: f64,
    pub rule: String,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: Option<usize>,
    pub seed: u64,
    pub init_scale: f64,
    /// Sweep values for `sweep-k`.
    pub sweep_k: Vec<f64>,
    /// Triplet seed for the composed-loss evaluation.
    pub eval_seed: u64,
}

impl Default for DdcSection {
    fn default() -> Self {
        let d = FinetuneConfig::default();
        Self {
            k: 0.3,
            rule: "b_a".into(),
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
            patience: d.patience,
            max_epochs: d.max_epochs,
            seed: 13,
            init_scale: d.init_scale,
            sweep_k: vec![0.1, 0.3, 0.5, 0.7, 1.0],
            eval_seed: 777,
        }
    }
}

impl DdcSection {
    pub fn to_core(&self) -> FinetuneConfig {
        FinetuneConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed: self.seed,
            init_scale: self.init_scale,
            ..Default::default()
        }
    }

    pub fn parsed_rule(&self) -> Result<UpdateRule> {
        Ok(UpdateRule::parse(&self.rule)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub k_list: Vec<usize>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { k_list: vec![10] }
    }
}

/// Load a config: defaults, overlaid by the optional file, then `--set`
/// overrides applied onto the merged JSON value.
pub fn load_config(file: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let value = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Data(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str::<serde_json::Value>(&text)
                .map_err(|e| CliError::Usage(format!("malformed config JSON: {e}")))?
        }
        None => serde_json::json!({}),
    };
    apply_overrides(value, overrides)
}

/// Apply `--set key=value` overrides to a JSON config value and deserialize.
pub fn apply_overrides(
    mut value: serde_json::Value,
    overrides: &[String],
) -> Result<ExperimentConfig> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {item:?}")))?;
        let parsed: serde_json::Value =
            serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
        set_path(&mut value, key, parsed)?;
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Insert `new` at a dotted path like `train.learning_rate`.
fn set_path(root: &mut serde_json::Value, path: &str, new: serde_json::Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (idx, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Usage(format!(
                "empty segment in --set path {path:?}"
            )));
        }
        let map = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("--set path {path:?} crosses a non-object")))?;
        if idx == parts.len() - 1 {
            map.insert(part.to_string(), new);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| serde_json::json!({}));
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dataset.k_core, 10);
        assert_eq!(back.eval.k_list, vec![10]);
    }

    #[test]
    fn set_overrides_nested_keys() {
        let cfg = load_config(
            None,
            &[
                "train.learning_rate=0.5".into(),
                "backbone.kind=lightgcn".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.train.learning_rate, 0.5);
        assert_eq!(cfg.backbone.kind, "lightgcn");
    }

    #[test]
    fn set_string_values_need_no_quotes() {
        let cfg = load_config(None, &["ddc.rule=ab_a".into()]).unwrap();
        assert_eq!(cfg.ddc.rule, "ab_a");
    }

    #[test]
    fn bad_set_syntax_is_usage_error() {
        assert!(matches!(
            load_config(None, &["nonsense".into()]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn unknown_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"trian": {}}"#).unwrap();
        assert!(matches!(
            load_config(Some(&path), &[]),
            Err(CliError::Usage(_))
        ));
    }
}
